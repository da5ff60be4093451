#include "altest/dataset_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "altest/error.hpp"

namespace altest {

namespace {

constexpr const char* kFormat = "altest-dataset";
constexpr int kVersion = 1;

std::uint64_t to_little_endian(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffULL) << (8 * (7 - i));
        return r;
    } else {
        return v;
    }
}

void put(std::ostream& out, double v) {
    const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
}

double get(std::istream& in) {
    char buf[8];
    if (!in.read(buf, 8)) throw Error(ErrorKind::parse, "read_dataset: payload truncated");
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    return std::bit_cast<double>(to_little_endian(bits));
}

template <class T>
T header_field(const nlohmann::json& h, const char* key) {
    if (!h.contains(key)) throw Error(ErrorKind::parse, std::string("read_dataset: header missing '") + key + "'");
    try {
        return h.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorKind::parse, std::string("read_dataset: header field '") + key + "' has wrong type");
    }
}

} // namespace

void write_dataset(std::ostream& out, const Dataset& data, const DatasetFileInfo& info) {
    const bool noise = data.has_noise();
    const nlohmann::json header = {
        {"format", kFormat},
        {"version", kVersion},
        {"p", data.p()},
        {"m", data.m()},
        {"n", data.n()},
        {"seed", info.seed},
        {"stream", {info.stream.trial, info.stream.subset, info.stream.role}},
        {"has_noise", noise},
        {"encoding", "float64-le"},
        {"layout", noise ? "X(m*p,row-major),y(m),noise(m)" : "X(m*p,row-major),y(m)"},
    };
    out << header.dump() << '\n';
    for (const Observation& o : data.observations()) {
        for (Eigen::Index r = 0; r < o.X.rows(); ++r)
            for (Eigen::Index c = 0; c < o.X.cols(); ++c) put(out, o.X(r, c));
        for (Eigen::Index r = 0; r < o.y.size(); ++r) put(out, o.y(r));
        if (noise)
            for (Eigen::Index r = 0; r < o.noise.size(); ++r) put(out, o.noise(r));
    }
    if (!out) throw Error(ErrorKind::io, "write_dataset: write failed");
}

void write_dataset(const std::filesystem::path& path, const Dataset& data, const DatasetFileInfo& info) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "write_dataset: cannot open " + path.string());
    write_dataset(out, data, info);
}

Dataset read_dataset(std::istream& in, DatasetFileInfo* info) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::parse, "read_dataset: missing header line");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, std::string("read_dataset: bad header: ") + e.what());
    }
    if (header_field<std::string>(h, "format") != kFormat) {
        throw Error(ErrorKind::parse, "read_dataset: not an altest dataset");
    }
    if (header_field<int>(h, "version") != kVersion) {
        throw Error(ErrorKind::parse, "read_dataset: unsupported version");
    }
    const auto p = header_field<std::size_t>(h, "p");
    const auto m = header_field<std::size_t>(h, "m");
    const auto n = header_field<std::size_t>(h, "n");
    const bool noise = h.value("has_noise", false);
    if (info) {
        info->seed = header_field<std::uint64_t>(h, "seed");
        const auto s = h.value("stream", std::vector<std::uint64_t>{0, 0, 0});
        if (s.size() == 3) info->stream = {s[0], s[1], s[2]};
    }
    std::vector<Observation> obs(n);
    for (auto& o : obs) {
        o.X.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(p));
        o.y.resize(static_cast<Eigen::Index>(m));
        for (Eigen::Index r = 0; r < o.X.rows(); ++r)
            for (Eigen::Index c = 0; c < o.X.cols(); ++c) o.X(r, c) = get(in);
        for (Eigen::Index r = 0; r < o.y.size(); ++r) o.y(r) = get(in);
        if (noise) {
            o.noise.resize(static_cast<Eigen::Index>(m));
            for (Eigen::Index r = 0; r < o.noise.size(); ++r) o.noise(r) = get(in);
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw Error(ErrorKind::parse, "read_dataset: trailing bytes after payload");
    }
    return Dataset(std::move(obs));
}

Dataset read_dataset(const std::filesystem::path& path, DatasetFileInfo* info) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "read_dataset: cannot open " + path.string());
    return read_dataset(in, info);
}

} // namespace altest
