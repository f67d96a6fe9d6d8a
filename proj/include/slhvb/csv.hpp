#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace slhvb {

// Floats are serialized with 9 significant digits so that output files are
// byte-stable across runs and parallelism levels.
inline std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) {
        append_row_(header);
    }

    void row(const std::vector<std::string>& cells) { append_row_(cells); }

    const std::string& str() const { return out_; }

private:
    void append_row_(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ += ',';
            out_ += cells[i];
        }
        out_ += '\n';
    }

    std::string out_;
};

} // namespace slhvb
