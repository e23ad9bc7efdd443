#include "rr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace rr {

namespace {

static_assert(sizeof(double) == 8);

void write_f64_le(std::ostream& os, const double* p, size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * 8));
    } else {
        for (size_t i = 0; i < n; ++i) {
            uint64_t u;
            std::memcpy(&u, p + i, 8);
            char b[8];
            for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((u >> (8 * k)) & 0xff);
            os.write(b, 8);
        }
    }
}

void read_f64_le(std::istream& is, double* p, size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * 8));
    } else {
        for (size_t i = 0; i < n; ++i) {
            char b[8];
            is.read(b, 8);
            uint64_t u = 0;
            for (int k = 0; k < 8; ++k) u |= static_cast<uint64_t>(static_cast<unsigned char>(b[k])) << (8 * k);
            std::memcpy(p + i, &u, 8);
        }
    }
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& params, const nlohmann::json& meta) {
    nlohmann::json header;
    header["format_version"] = 1;
    header["dtype"] = "f64";
    nlohmann::json plist = nlohmann::json::array();
    for (const auto& [name, t] : params.tensors) {
        nlohmann::json e;
        e["name"] = name;
        e["shape"] = t.shape;
        e["frozen"] = params.frozen.count(name) != 0;
        plist.push_back(e);
    }
    header["params"] = plist;
    header["meta"] = meta;

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    os << header.dump() << '\n';
    for (const auto& [name, t] : params.tensors) write_f64_le(os, t.data.data(), t.data.size());
    if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("checkpoint header missing: " + path);
    nlohmann::json header = nlohmann::json::parse(line);
    if (header.at("format_version").get<int>() != 1)
        throw std::runtime_error("unsupported checkpoint format version");
    if (header.at("dtype").get<std::string>() != "f64")
        throw std::runtime_error("unsupported checkpoint dtype");
    Checkpoint ck;
    ck.meta = header.value("meta", nlohmann::json::object());
    for (const auto& e : header.at("params")) {
        const std::string name = e.at("name").get<std::string>();
        std::vector<int> shape = e.at("shape").get<std::vector<int>>();
        nd::Tensor t = nd::Tensor::zeros(shape);
        read_f64_le(is, t.data.data(), t.data.size());
        if (!is) throw std::runtime_error("checkpoint payload truncated: " + path);
        ck.params.tensors.emplace(name, std::move(t));
        if (e.value("frozen", false)) ck.params.frozen.insert(name);
    }
    return ck;
}

}  // namespace rr
