#include "tsd/io.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace tsd::io {

namespace {

constexpr std::array<char, 4> kTensorMagic{'T', 'S', 'R', '1'};
constexpr std::array<char, 4> kMaskMagic{'T', 'S', 'M', '1'};
constexpr std::array<char, 4> kNetworkMagic{'T', 'S', 'N', '1'};
// Guards allocation against garbage headers.
constexpr std::uint64_t kMaxOrder = 64;

void put_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    os.write(b, 8);
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

bool get_u64(std::istream& is, std::uint64_t& v) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
    return true;
}

std::string magic_string(const char* m) {
    std::string s;
    for (int i = 0; i < 4; ++i) {
        const auto c = static_cast<unsigned char>(m[i]);
        if (c >= 0x20 && c < 0x7f) {
            s += static_cast<char>(c);
        } else {
            std::ostringstream os;
            os << "\\x" << std::hex << std::setw(2) << std::setfill('0') << int{c};
            s += os.str();
        }
    }
    return s;
}

void expect_magic(std::istream& is, const std::array<char, 4>& magic, const char* what) {
    char got[4] = {0, 0, 0, 0};
    if (!is.read(got, 4)) {
        throw FormatError(std::string(what) + ": file too short for magic field");
    }
    if (std::memcmp(got, magic.data(), 4) != 0) {
        throw FormatError(std::string(what) + ": bad magic field '" + magic_string(got) +
                          "', expected '" + std::string(magic.data(), 4) + "'");
    }
}

void write_header(std::ostream& os, const std::array<char, 4>& magic, const Shape& shape) {
    os.write(magic.data(), 4);
    put_u64(os, shape.size());
    for (std::size_t e : shape) put_u64(os, e);
}

Shape read_shape(std::istream& is, const char* what) {
    std::uint64_t order = 0;
    if (!get_u64(is, order)) throw FormatError(std::string(what) + ": missing order field");
    if (order > kMaxOrder) {
        throw FormatError(std::string(what) + ": order field " + std::to_string(order) +
                          " exceeds the supported maximum " + std::to_string(kMaxOrder));
    }
    Shape shape(order);
    for (std::uint64_t k = 0; k < order; ++k) {
        std::uint64_t e = 0;
        if (!get_u64(is, e)) {
            throw FormatError(std::string(what) + ": order field says " + std::to_string(order) +
                              " extents but the header ends after " + std::to_string(k));
        }
        if (e == 0) {
            throw FormatError(std::string(what) + ": extent field " + std::to_string(k) +
                              " is zero");
        }
        shape[k] = e;
    }
    return shape;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string() + " for reading");
    return is;
}

void expect_end(std::istream& is, const char* what, const std::string& detail) {
    if (is.peek() != std::char_traits<char>::eof()) {
        throw FormatError(std::string(what) + ": trailing bytes after " + detail);
    }
}

DenseTensor read_tensor_record(std::istream& is) {
    constexpr const char* what = "tensor file";
    expect_magic(is, kTensorMagic, what);
    Shape shape = read_shape(is, what);
    const std::size_t count = element_count(shape);
    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits = 0;
        if (!get_u64(is, bits)) {
            throw FormatError(std::string(what) + ": payload holds " + std::to_string(i) +
                              " values but extents " + shape_string(shape) + " require " +
                              std::to_string(count));
        }
        data[i] = std::bit_cast<double>(bits);
    }
    return DenseTensor(std::move(shape), std::move(data));
}

}  // namespace

void write_tensor(std::ostream& os, const DenseTensor& t) {
    write_header(os, kTensorMagic, t.shape());
    for (double v : t.data()) put_f64(os, v);
    if (!os) throw std::runtime_error("write failed");
}

DenseTensor read_tensor(std::istream& is) {
    DenseTensor t = read_tensor_record(is);
    expect_end(is, "tensor file", "payload of " + std::to_string(t.size()) + " values for extents " +
                                      shape_string(t.shape()));
    return t;
}

void write_tensor(const std::filesystem::path& path, const DenseTensor& t) {
    auto os = open_out(path);
    write_tensor(os, t);
}

DenseTensor read_tensor(const std::filesystem::path& path) {
    auto is = open_in(path);
    try {
        return read_tensor(is);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_mask(std::ostream& os, const ObservationMask& mask) {
    write_header(os, kMaskMagic, mask.shape());
    put_u64(os, mask.count());
    for (std::uint64_t i : mask.observed()) put_u64(os, i);
    if (!os) throw std::runtime_error("write failed");
}

ObservationMask read_mask(std::istream& is) {
    constexpr const char* what = "mask file";
    expect_magic(is, kMaskMagic, what);
    Shape shape = read_shape(is, what);
    const std::size_t total = element_count(shape);
    std::uint64_t count = 0;
    if (!get_u64(is, count)) throw FormatError(std::string(what) + ": missing count field");
    if (count > total) {
        throw FormatError(std::string(what) + ": count field " + std::to_string(count) +
                          " exceeds the " + std::to_string(total) + " entries of extents " +
                          shape_string(shape));
    }
    std::vector<std::uint64_t> idx(count);
    for (std::uint64_t m = 0; m < count; ++m) {
        if (!get_u64(is, idx[m])) {
            throw FormatError(std::string(what) + ": count field says " + std::to_string(count) +
                              " offsets but the file ends after " + std::to_string(m));
        }
        if (idx[m] >= total) {
            throw FormatError(std::string(what) + ": offset " + std::to_string(idx[m]) +
                              " outside extents " + shape_string(shape));
        }
        if (m > 0 && idx[m] <= idx[m - 1]) {
            throw FormatError(std::string(what) + ": offsets not strictly increasing at entry " +
                              std::to_string(m));
        }
    }
    expect_end(is, what, std::to_string(count) + " offsets");
    return ObservationMask(std::move(shape), std::move(idx));
}

void write_mask(const std::filesystem::path& path, const ObservationMask& mask) {
    auto os = open_out(path);
    write_mask(os, mask);
}

ObservationMask read_mask(const std::filesystem::path& path) {
    auto is = open_in(path);
    try {
        return read_mask(is);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_network(std::ostream& os, const TSNetwork& net) {
    require_valid(net);
    os.write(kNetworkMagic.data(), 4);
    put_u64(os, net.order());
    for (std::size_t k = 0; k < net.order(); ++k) {
        write_tensor(os, net.factors[k]);
        write_tensor(os, net.cores[k]);
    }
    if (!os) throw std::runtime_error("write failed");
}

TSNetwork read_network(std::istream& is) {
    constexpr const char* what = "network file";
    expect_magic(is, kNetworkMagic, what);
    std::uint64_t order = 0;
    if (!get_u64(is, order)) throw FormatError(std::string(what) + ": missing order field");
    if (order < 3 || order > kMaxOrder) {
        throw FormatError(std::string(what) + ": order field " + std::to_string(order) +
                          " outside 3.." + std::to_string(kMaxOrder));
    }
    TSNetwork net;
    for (std::uint64_t k = 0; k < order; ++k) {
        net.factors.push_back(read_tensor_record(is));
        net.cores.push_back(read_tensor_record(is));
        const auto& g = net.factors.back();
        const auto& c = net.cores.back();
        if (g.order() != 3 || c.order() != 4) {
            throw FormatError(std::string(what) + ": component " + std::to_string(k + 1) +
                              " has factor order " + std::to_string(g.order()) +
                              " and core order " + std::to_string(c.order()) +
                              ", expected 3 and 4");
        }
        net.mode_sizes.push_back(g.extent(1));
        net.profile.left.push_back(g.extent(0));
        net.profile.right.push_back(g.extent(2));
        net.profile.ring.push_back(c.extent(1));
    }
    expect_end(is, what, std::to_string(order) + " components");
    const auto violations = validate(net);
    if (!violations.empty()) throw FormatError(std::string(what) + ": " + violations.front());
    return net;
}

void write_network(const std::filesystem::path& path, const TSNetwork& net) {
    auto os = open_out(path);
    write_network(os, net);
}

TSNetwork read_network(const std::filesystem::path& path) {
    auto is = open_in(path);
    try {
        return read_network(is);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

RankProfile parse_profile_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("rank profile: ") + e.what());
    }
    RankProfile p;
    try {
        p.left = j.at("R1").get<std::vector<std::size_t>>();
        p.right = j.at("R2").get<std::vector<std::size_t>>();
        p.ring = j.at("L").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("rank profile needs integer arrays R1, R2, L: ") + e.what());
    }
    p.validate();
    return p;
}

RankProfile read_profile(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string() + " for reading");
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_profile_json(ss.str());
}

std::string profile_to_json(const RankProfile& p) {
    return nlohmann::json{{"R1", p.left}, {"R2", p.right}, {"L", p.ring}}.dump();
}

void dump_csv(std::ostream& os, const DenseTensor& t) {
    const auto old = os.precision(std::numeric_limits<double>::max_digits10);
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t k : unravel_index(i, t.shape())) os << k << ',';
        os << t[i] << '\n';
    }
    os.precision(old);
}

}  // namespace tsd::io
