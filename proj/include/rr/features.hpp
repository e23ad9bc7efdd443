#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace rr::features {

struct SecurityPosture {
    double software_count = 0.0;
    double avg_cves = 0.0;
    double avg_cvss = 0.0;
    double max_cvss = 0.0;
    double https_ok = 0.0;
    double cert_errors = 0.0;

    std::vector<double> as_vector() const {
        return {software_count, avg_cves, avg_cvss, max_cvss, https_ok, cert_errors};
    }
};

constexpr int kSecurityDim = 6;
constexpr int kContentDim = 768;
constexpr int kIpBits = 32;
constexpr int kCategoryCount = 20;
constexpr int kMaxUrlLen = 256;

// URL vocabulary: 95 printable ASCII chars plus padding (0) and unknown (1).
constexpr int kUrlVocab = 97;
int url_char_id(char c);

struct FeatureRecord {
    uint32_t ip = 0;  // host byte order
    int category = 0;
    std::vector<double> content;  // 768-dim
    std::string url;
    SecurityPosture security;
};

// 32-bit big-endian bit decomposition, most significant bit first.
std::vector<double> embed_ip(uint32_t ip);
uint32_t parse_ipv4(const std::string& dotted);

// Identity passthrough; rejects any dimension other than 768.
std::vector<double> embed_content(const std::vector<double>& content_vec);

// Analytics-snapshot ingestion: line-delimited JSON, one site per line.
// Missing security fields default to the conservative unknown posture.
std::map<int, FeatureRecord> ingest_snapshot(const std::string& path);
void save_snapshot(const std::string& path, const std::map<int, FeatureRecord>& records,
                   const std::string& config_json);

}  // namespace rr::features
