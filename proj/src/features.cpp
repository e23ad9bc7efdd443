#include "rr/features.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace rr::features {

int url_char_id(char c) {
    const unsigned char u = static_cast<unsigned char>(c);
    if (u >= 32 && u < 127) return 2 + (u - 32);  // printable ASCII
    return 1;                                     // unknown
}

std::vector<double> embed_ip(uint32_t ip) {
    std::vector<double> bits(kIpBits);
    for (int i = 0; i < kIpBits; ++i) bits[static_cast<size_t>(i)] = (ip >> (31 - i)) & 1u ? 1.0 : 0.0;
    return bits;
}

uint32_t parse_ipv4(const std::string& dotted) {
    uint32_t ip = 0;
    int octets = 0;
    std::istringstream ss(dotted);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (part.empty() || part.size() > 3 || octets >= 4) throw std::invalid_argument("malformed IPv4: " + dotted);
        for (char c : part)
            if (c < '0' || c > '9') throw std::invalid_argument("malformed IPv4: " + dotted);
        const int v = std::stoi(part);
        if (v > 255) throw std::invalid_argument("malformed IPv4: " + dotted);
        ip = (ip << 8) | static_cast<uint32_t>(v);
        ++octets;
    }
    if (octets != 4) throw std::invalid_argument("malformed IPv4: " + dotted);
    return ip;
}

std::vector<double> embed_content(const std::vector<double>& content_vec) {
    if (static_cast<int>(content_vec.size()) != kContentDim)
        throw std::invalid_argument("content vector must have dimension 768");
    return content_vec;
}

namespace {

std::string ip_to_string(uint32_t ip) {
    std::ostringstream os;
    os << ((ip >> 24) & 0xff) << '.' << ((ip >> 16) & 0xff) << '.' << ((ip >> 8) & 0xff) << '.'
       << (ip & 0xff);
    return os.str();
}

FeatureRecord parse_record(const nlohmann::json& j, int lineno) {
    FeatureRecord r;
    try {
        r.ip = parse_ipv4(j.at("ip").get<std::string>());
        r.category = j.at("category").get<int>();
        if (r.category < 0 || r.category >= kCategoryCount)
            throw std::invalid_argument("category out of range");
        r.content = j.at("content_vec").get<std::vector<double>>();
        if (static_cast<int>(r.content.size()) != kContentDim)
            throw std::invalid_argument("content_vec must have 768 entries");
        r.url = j.at("url").get<std::string>();
        if (r.url.empty()) throw std::invalid_argument("url must be non-empty");
        if (j.contains("security")) {
            const auto& s = j.at("security");
            r.security.software_count = s.value("software_count", 0.0);
            r.security.avg_cves = s.value("avg_cves", 0.0);
            r.security.avg_cvss = s.value("avg_cvss", 0.0);
            r.security.max_cvss = s.value("max_cvss", 0.0);
            r.security.https_ok = s.value("https_ok", 0.0);
            r.security.cert_errors = s.value("cert_errors", 0.0);
        }
        if (r.security.max_cvss < r.security.avg_cvss)
            throw std::invalid_argument("max_cvss must be >= avg_cvss");
    } catch (const std::exception& ex) {
        throw std::runtime_error("snapshot schema violation at line " + std::to_string(lineno) +
                                 ": " + ex.what());
    }
    return r;
}

}  // namespace

std::map<int, FeatureRecord> ingest_snapshot(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open snapshot file: " + path);
    std::map<int, FeatureRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception&) {
            throw std::runtime_error("snapshot parse error at line " + std::to_string(lineno));
        }
        if (j.value("kind", "site") == "header") continue;
        const int id = j.at("site_id").get<int>();
        if (out.count(id))
            throw std::runtime_error("snapshot: duplicate site id " + std::to_string(id) +
                                     " at line " + std::to_string(lineno));
        out.emplace(id, parse_record(j, lineno));
    }
    return out;
}

void save_snapshot(const std::string& path, const std::map<int, FeatureRecord>& records,
                   const std::string& config_json) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open snapshot file for writing: " + path);
    nlohmann::json header{{"kind", "header"}, {"record", "analytics_snapshot"}};
    if (!config_json.empty()) header["config"] = nlohmann::json::parse(config_json);
    os << header.dump() << '\n';
    for (const auto& [id, r] : records) {
        nlohmann::json j;
        j["site_id"] = id;
        j["ip"] = ip_to_string(r.ip);
        j["category"] = r.category;
        j["url"] = r.url;
        j["content_vec"] = r.content;
        j["security"] = {{"software_count", r.security.software_count},
                         {"avg_cves", r.security.avg_cves},
                         {"avg_cvss", r.security.avg_cvss},
                         {"max_cvss", r.security.max_cvss},
                         {"https_ok", r.security.https_ok},
                         {"cert_errors", r.security.cert_errors}};
        os << j.dump() << '\n';
    }
    if (!os) throw std::runtime_error("snapshot write failed: " + path);
}

}  // namespace rr::features
