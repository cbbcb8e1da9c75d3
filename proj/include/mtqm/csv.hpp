#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace mtqm {

/// Formats with 17 significant digits, enough to read the same double back.
std::string format_double(double x);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws std::out_of_range if absent.
    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
};

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void row(const std::vector<std::string>& cells);
    void row(const std::vector<double>& cells);

private:
    std::ofstream out_;
    std::size_t width_;
};

/// Reads a file written by CsvWriter. Throws std::runtime_error on ragged rows.
CsvTable read_csv(const std::string& path);

} // namespace mtqm
