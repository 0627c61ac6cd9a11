#include "artifacts.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace kspec::cli {

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

std::string fmt(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

void CsvTable::row(const std::vector<std::string>& cells) {
    if (cells.size() != header_.size()) throw std::logic_error("csv row width mismatch");
    rows_.push_back(cells);
}

namespace {
std::string quote(const std::string& f) {
    if (f.find_first_of(",\"\n") == std::string::npos) return f;
    std::string out = "\"";
    for (char c : f) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    return out + "\"";
}

void put_line(std::string& s, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) s.push_back(',');
        s += quote(cells[i]);
    }
    s.push_back('\n');
}
}  // namespace

std::string CsvTable::str() const {
    std::string s;
    put_line(s, header_);
    for (const auto& r : rows_) put_line(s, r);
    return s;
}

ArtifactWriter::ArtifactWriter(std::string dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

void ArtifactWriter::write(const std::string& name, const std::string& content) {
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& e : entries_)
        if (e.file == name) throw std::logic_error("artifact written twice: " + name);
    const auto path = std::filesystem::path(dir_) / name;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
    entries_.push_back({name, content.size(), sha256_hex(content)});
}

void ArtifactWriter::write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

void ArtifactWriter::finish(const Json& header) {
    std::vector<Entry> sorted;
    {
        std::lock_guard<std::mutex> lock(mu_);
        sorted = entries_;
    }
    std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) { return a.file < b.file; });
    Json m = header;
    Json files = Json::array();
    for (const auto& e : sorted) files.push_back({{"file", e.file}, {"bytes", e.bytes}, {"sha256", e.sha256}});
    m["files"] = files;
    const auto path = std::filesystem::path(dir_) / "manifest.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << m.dump(2) << "\n";
}

}  // namespace kspec::cli
