#pragma once

#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"

namespace kspec::cli {

using Json = nlohmann::ordered_json;

std::string sha256_hex(const std::string& bytes);

// Shortest text that round-trips the double.
std::string fmt(double v);

// RFC-4180 style table: header row, '\n' line ends, fields quoted when needed.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void row(const std::vector<std::string>& cells);
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Writes files under one directory and records each in the manifest exactly once.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::string dir);
    void write(const std::string& name, const std::string& content);
    void write_json(const std::string& name, const Json& j);
    // manifest.json: header fields plus a sorted list of {file, bytes, sha256}.
    void finish(const Json& header);
    const std::string& dir() const { return dir_; }

private:
    struct Entry {
        std::string file;
        std::size_t bytes;
        std::string sha256;
    };
    std::string dir_;
    std::vector<Entry> entries_;
    std::mutex mu_;
};

}  // namespace kspec::cli
