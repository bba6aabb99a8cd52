#pragma once

// Run reports and the on-disk formats: CSV time series and a JSON summary.
// Doubles are written with 17 significant digits so files round-trip and
// identical runs produce identical bytes.

#include <string>
#include <vector>

namespace entfree {

enum class Comparison { at_most, at_least, less_than, greater_than };

struct CheckResult {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    Comparison comparison = Comparison::at_most;
    bool pass = false;
    std::string detail;
};

// Builds a CheckResult and evaluates it. NaN values fail.
CheckResult make_check(std::string name, double value, Comparison comparison, double threshold,
                       std::string detail = "");

struct RunReport {
    std::string scenario;
    std::string mode;
    unsigned long long seed = 0;
    double wall_time_s = 0.0;
    std::vector<CheckResult> checks;
    std::vector<std::string> outputs;
    std::vector<std::string> warnings;

    bool passed() const;
};

std::string comparison_symbol(Comparison c);
std::string format_double(double v); // "%.17g"; nan/inf spelled out
std::string report_json(const RunReport& report);
// Fixed-width table for terminals.
std::string report_table(const RunReport& report);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    void add_row(const std::vector<double>& values);
    std::string str() const;
    std::size_t rows() const { return rows_; }

private:
    std::vector<std::string> header_;
    std::string body_;
    std::size_t rows_ = 0;
};

// Writes to a temporary sibling and renames it into place. Throws IoError.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace entfree
