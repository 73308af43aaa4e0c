// Fixed output formats: the diagnostics CSV (schema "chd-sharp v1") and the
// field snapshot container (text header plus raw little-endian float64
// payload; a read reproduces the field bitwise).

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "chd/diagnostics.hpp"

namespace chd {

// %.17g: enough digits that parsing the text recovers the exact double.
std::string format_g17(double v);

extern const char* const kCsvSchemaLine;   // "# chd-sharp v1"
extern const char* const kCsvColumnsLine;  // comma-separated column names

std::string csv_row(const DiagnosticsRecord& rec);

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path);
    void write_record(const DiagnosticsRecord& rec);
    void write_comment(const std::string& line);  // prefixed with "# "
    const std::string& path() const { return path_; }

  private:
    std::string path_;
    std::ofstream out_;
};

void write_snapshot(const std::string& path, const ScalarField& f, const std::string& name,
                    double t);

struct Snapshot {
    std::string name;
    double t = 0.0;
    ScalarField field;
};

Snapshot read_snapshot(const std::string& path);

}  // namespace chd
