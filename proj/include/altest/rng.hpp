#pragma once

#include <array>
#include <cstdint>
#include <random>

namespace altest {

// Stream identifier under one root seed. The three words are conventionally
// (trial, subset, role) but any fixed layout works as long as callers agree.
struct StreamId {
    std::uint64_t trial = 0;
    std::uint64_t subset = 0;
    std::uint64_t role = 0;
};

// Roles used across the library so streams never collide.
namespace stream_role {
inline constexpr std::uint64_t dataset = 1;
inline constexpr std::uint64_t geometry_ball = 2;
inline constexpr std::uint64_t geometry_cone = 3;
inline constexpr std::uint64_t geometry_psi = 4;
inline constexpr std::uint64_t xi_check = 5;
inline constexpr std::uint64_t power_iteration = 6;
} // namespace stream_role

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based key derivation: the engine seed is a keyed hash of
// (root, stream words), so every stream is reachable without stepping others.
std::uint64_t derive_seed(std::uint64_t root, const StreamId& id);

using Engine = std::mt19937_64;

Engine make_engine(std::uint64_t root, const StreamId& id);

} // namespace altest
