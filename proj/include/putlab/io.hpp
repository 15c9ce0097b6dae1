#ifndef PUTLAB_IO_HPP
#define PUTLAB_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace putlab::io {

// Shortest representation that round-trips a double exactly, capped at
// 17 significant digits. All file output goes through this so reruns
// are byte-identical.
std::string format_double(double value);

// Write-temp-then-rename so readers never see a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_cell(double value);
    void add_cell(const std::string& value);
    void add_cell(long long value);
    void end_row();

    std::string str() const;
    std::size_t rows() const { return rows_; }

private:
    std::string buf_;
    std::size_t columns_;
    std::size_t cells_in_row_ = 0;
    std::size_t rows_ = 0;
};

}  // namespace putlab::io

#endif
