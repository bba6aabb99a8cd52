#include "entfree/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "entfree/errors.hpp"

namespace entfree {

namespace fs = std::filesystem;

namespace {

using ordered_json = nlohmann::ordered_json;

// nlohmann prints the shortest round-trip form; the report format asks for
// a fixed 17 significant digits, so numbers are emitted by hand.
void emit(const ordered_json& j, std::string& out, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
        case ordered_json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad + ordered_json(it.key()).dump() + ": ";
                emit(it.value(), out, indent, depth + 1);
            }
            out += "\n" + close_pad + "}";
            return;
        }
        case ordered_json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t k = 0; k < j.size(); ++k) {
                if (k) out += ",\n";
                out += pad;
                emit(j[k], out, indent, depth + 1);
            }
            out += "\n" + close_pad + "]";
            return;
        }
        case ordered_json::value_t::number_float: {
            const double v = j.get<double>();
            out += std::isfinite(v) ? format_double(v) : "null";
            return;
        }
        default: out += j.dump();
    }
}

}  // namespace

CheckResult make_check(std::string name, double value, Comparison comparison, double threshold,
                       std::string detail) {
    bool pass = false;
    if (!std::isnan(value)) {
        switch (comparison) {
            case Comparison::at_most: pass = value <= threshold; break;
            case Comparison::at_least: pass = value >= threshold; break;
            case Comparison::less_than: pass = value < threshold; break;
            case Comparison::greater_than: pass = value > threshold; break;
        }
    }
    return {std::move(name), value, threshold, comparison, pass, std::move(detail)};
}

bool RunReport::passed() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string comparison_symbol(Comparison c) {
    switch (c) {
        case Comparison::at_most: return "<=";
        case Comparison::at_least: return ">=";
        case Comparison::less_than: return "<";
        case Comparison::greater_than: return ">";
    }
    return "?";
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string report_json(const RunReport& report) {
    ordered_json j;
    j["scenario"] = report.scenario;
    j["mode"] = report.mode;
    j["seed"] = report.seed;
    j["passed"] = report.passed();
    j["wall_time_s"] = report.wall_time_s;
    ordered_json checks = ordered_json::array();
    for (const auto& c : report.checks) {
        ordered_json cj;
        cj["name"] = c.name;
        cj["value"] = c.value;
        cj["comparison"] = comparison_symbol(c.comparison);
        cj["threshold"] = c.threshold;
        cj["pass"] = c.pass;
        if (!c.detail.empty()) cj["detail"] = c.detail;
        checks.push_back(std::move(cj));
    }
    j["checks"] = std::move(checks);
    j["outputs"] = report.outputs;
    j["warnings"] = report.warnings;
    std::string out;
    emit(j, out, 2, 0);
    out += "\n";
    return out;
}

std::string report_table(const RunReport& report) {
    std::ostringstream out;
    std::size_t width = 5;
    for (const auto& c : report.checks) width = std::max(width, c.name.size());
    for (const auto& c : report.checks) {
        char line[256];
        std::snprintf(line, sizeof line, "%-4s  %-*s  %-13.6g %-2s %-12.10g", c.pass ? "ok" : "FAIL",
                      static_cast<int>(width), c.name.c_str(), c.value,
                      comparison_symbol(c.comparison).c_str(), c.threshold);
        out << line;
        if (!c.detail.empty()) out << "  " << c.detail;
        out << "\n";
    }
    std::size_t failed = 0;
    for (const auto& c : report.checks) failed += c.pass ? 0 : 1;
    out << report.scenario << ": " << report.checks.size() - failed << "/" << report.checks.size()
        << " checks passed\n";
    return out.str();
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<double>& values) {
    require(values.size() == header_.size(), "CsvTable: row width does not match the header");
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k) body_ += ',';
        body_ += format_double(values[k]);
    }
    body_ += '\n';
    ++rows_;
}

std::string CsvTable::str() const {
    std::string out;
    for (std::size_t k = 0; k < header_.size(); ++k) {
        if (k) out += ',';
        out += header_[k];
    }
    out += '\n';
    return out + body_;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    const fs::path target(path);
    std::error_code ec;
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + target.parent_path().string() + "': " + ec.message());
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out << contents;
        out.flush();
        if (!out) throw IoError("write to '" + tmp.string() + "' failed");
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move output into place at '" + path + "'");
    }
}

}  // namespace entfree
