#include "putlab/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace putlab::io {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    if (res.ec != std::errc()) {
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        return std::string(buf);
    }
    return std::string(buf, res.ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += header[i];
    }
    buf_ += '\n';
}

void CsvWriter::add_cell(double value) { add_cell(format_double(value)); }

void CsvWriter::add_cell(const std::string& value) {
    if (cells_in_row_) buf_ += ',';
    buf_ += value;
    ++cells_in_row_;
}

void CsvWriter::add_cell(long long value) { add_cell(std::to_string(value)); }

void CsvWriter::end_row() {
    if (cells_in_row_ != columns_)
        throw std::logic_error("csv row has wrong cell count");
    buf_ += '\n';
    cells_in_row_ = 0;
    ++rows_;
}

std::string CsvWriter::str() const {
    if (cells_in_row_ != 0) throw std::logic_error("csv row not terminated");
    return buf_;
}

}  // namespace putlab::io
