#pragma once

// Minimal reader for the comma-separated input schemas (no quoting).

#include "anomalyscan/errors.hpp"

#include <charconv>
#include <cstdio>
#include <initializer_list>
#include <istream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace anomalyscan::csv {

inline std::string_view trim(std::string_view s) noexcept {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline void split(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return;
        }
        out.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
}

// Shortest text that parses back to the same double.
inline std::string exact(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

class LineReader {
public:
    LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    // Reads the first non-comment line as a header.
    std::vector<std::string> header() {
        std::vector<std::string_view> f;
        if (!next(f)) fail("missing header");
        std::vector<std::string> out;
        for (auto v : f) out.emplace_back(v);
        return out;
    }

    void expect_header(std::initializer_list<std::string_view> names) {
        const auto got = header();
        bool ok = got.size() == names.size();
        std::size_t i = 0;
        for (auto n : names) {
            if (!ok) break;
            ok = got[i++] == n;
        }
        if (!ok) {
            std::string want;
            for (auto n : names) {
                if (!want.empty()) want += ',';
                want += n;
            }
            fail("header must be '" + want + "'");
        }
    }

    // Next data line split into fields; skips blank and '#' lines.
    bool next(std::vector<std::string_view>& fields) {
        while (std::getline(in_, line_)) {
            ++line_no_;
            const auto t = trim(line_);
            if (t.empty() || t.front() == '#') continue;
            split(t, fields);
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ValidationError(source_ + ":" + std::to_string(line_no_) + ": " + msg);
    }

    int to_int(std::string_view s, const char* what) const {
        s = trim(s);
        int v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size()) fail(std::string("malformed ") + what + " '" + std::string(s) + "'");
        return v;
    }

    double to_double(std::string_view s, const char* what) const {
        s = trim(s);
        if (!s.empty() && s.front() == '+') s.remove_prefix(1);
        double v = 0.0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
            fail(std::string("malformed ") + what + " '" + std::string(s) + "'");
        }
        return v;
    }

    std::size_t line_number() const noexcept { return line_no_; }

private:
    std::istream& in_;
    std::string source_;
    std::string line_;
    std::size_t line_no_ = 0;
};

} // namespace anomalyscan::csv
