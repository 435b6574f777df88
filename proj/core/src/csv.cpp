#include "restadv/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace restadv {

CsvReader::CsvReader(const std::filesystem::path& path) : path_(path), in_(path) {
    if (!in_) {
        throw std::runtime_error("cannot open " + path.string());
    }
    if (!std::getline(in_, line_)) {
        throw std::runtime_error(path.string() + ": empty file (header row required)");
    }
    ++line_number_;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    std::vector<std::string_view> cols;
    split_csv_line(line_, cols);
    header_.assign(cols.begin(), cols.end());
}

int CsvReader::column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (header_[i] == name) return static_cast<int>(i);
    }
    return -1;
}

int CsvReader::require_column(std::string_view name) const {
    const int idx = column(name);
    if (idx < 0) {
        throw std::runtime_error(path_.string() + ": missing required column '" + std::string(name) + "'");
    }
    return idx;
}

bool CsvReader::next_row() {
    while (std::getline(in_, line_)) {
        ++line_number_;
        if (!line_.empty() && line_.back() == '\r') line_.pop_back();
        if (line_.empty()) continue;
        split_csv_line(line_, fields_);
        if (fields_.size() != header_.size()) {
            fail("expected " + std::to_string(header_.size()) + " fields, got " +
                 std::to_string(fields_.size()));
        }
        return true;
    }
    return false;
}

std::string_view CsvReader::field(std::size_t i) const {
    return i < fields_.size() ? fields_[i] : std::string_view{};
}

void CsvReader::fail(const std::string& message) const {
    throw std::runtime_error(path_.string() + ":" + std::to_string(line_number_) + ": " + message);
}

long CsvReader::parse_long(std::size_t i, std::string_view what) const {
    const std::string s{field(i)};
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || errno != 0 || end != s.c_str() + s.size()) {
        fail("invalid integer for " + std::string(what) + ": '" + s + "'");
    }
    return v;
}

double CsvReader::parse_double(std::size_t i, std::string_view what) const {
    const std::string s{field(i)};
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || errno != 0 || end != s.c_str() + s.size()) {
        fail("invalid number for " + std::string(what) + ": '" + s + "'");
    }
    return v;
}

void split_csv_line(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

std::string format_double(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string format_fixed(double v, int digits) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::uint64_t fnv1a_update(std::uint64_t state, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        state ^= p[i];
        state *= 1099511628211ull;
    }
    return state;
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::uint64_t h = kFnvOffset;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        h = fnv1a_update(h, buf, static_cast<std::size_t>(in.gcount()));
    }
    return h;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

}  // namespace restadv
