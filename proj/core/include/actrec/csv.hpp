#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace actrec {

// Minimal CSV support for the flat survey files: comma separated, no quoting,
// one header line. Keeps line numbers so parse errors can point at the row.
struct CsvRow {
    int line_number = 0;
    std::vector<std::string> fields;
};

class CsvReader {
public:
    explicit CsvReader(const std::string& path);

    bool is_open() const { return file_.is_open(); }
    // false at end of file; empty lines are skipped
    bool next(CsvRow& row);

private:
    std::ifstream file_;
    int line_number_ = 0;
};

std::vector<std::string> split_csv_line(const std::string& line);
std::string join_csv(const std::vector<std::string>& fields);

}  // namespace actrec
