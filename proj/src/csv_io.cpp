#include "pubbias/csv_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pubbias/errors.hpp"

namespace pubbias {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(trim(field));
            field.clear();
        } else {
            field.push_back(ch);
        }
    }
    out.push_back(trim(field));
    return out;
}

std::string where(const CsvTable& t, std::size_t row) {
    return t.source() + ":" + std::to_string(t.line_of(row));
}

}  // namespace

CsvTable CsvTable::read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path);
}

CsvTable CsvTable::parse(std::string_view text, std::string source) {
    CsvTable table;
    table.source_ = std::move(source);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty() || line.front() == '#') {
            if (end == text.size()) break;
            continue;
        }
        auto fields = split_line(line);
        if (!have_header) {
            table.header_ = std::move(fields);
            have_header = true;
        } else {
            if (fields.size() != table.header_.size()) {
                throw DataError(table.source_ + ":" + std::to_string(line_no) + ": expected " +
                                std::to_string(table.header_.size()) + " fields, found " +
                                std::to_string(fields.size()));
            }
            table.rows_.push_back(std::move(fields));
            table.lines_.push_back(line_no);
        }
        if (end == text.size()) break;
    }
    return table;
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i)
        if (header_[i] == name) return i;
    return std::nullopt;
}

std::size_t CsvTable::require_column(std::string_view name) const {
    if (auto c = column(name)) return *c;
    throw DataError(source_ + ": missing required column '" + std::string(name) + "'");
}

double parse_double(const std::string& text, const CsvTable& table, std::size_t row, std::string_view column) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty() || !std::isfinite(value)) {
        throw DataError(where(table, row) + ": column '" + std::string(column) + "' is not a finite number: '" +
                        text + "'");
    }
    return value;
}

std::vector<TStatSample> load_tstats(const std::string& path) {
    const CsvTable table = CsvTable::read_file(path);
    std::vector<TStatSample> out;
    if (table.header().empty()) return out;
    const std::size_t id_col = table.require_column("id");
    const std::size_t t_col = table.require_column("tstat");
    const auto se_col = table.column("se_monthly_bps");
    const auto start_col = table.column("sample_start");
    const auto end_col = table.column("sample_end");
    const auto pub_col = table.column("pub_date");

    auto month = [&](std::optional<std::size_t> col, std::size_t row) -> std::optional<YearMonth> {
        if (!col || table.cell(row, *col).empty()) return std::nullopt;
        try {
            return YearMonth::parse(table.cell(row, *col));
        } catch (const DataError& e) {
            throw DataError(where(table, row) + ": " + e.what());
        }
    };

    std::set<std::string> ids;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        TStatSample s;
        s.id = table.cell(r, id_col);
        if (s.id.empty()) throw DataError(where(table, r) + ": empty id");
        if (!ids.insert(s.id).second) throw DataError(where(table, r) + ": duplicate id '" + s.id + "'");
        s.tstat = parse_double(table.cell(r, t_col), table, r, "tstat");
        if (se_col && !table.cell(r, *se_col).empty())
            s.se_monthly_bps = parse_double(table.cell(r, *se_col), table, r, "se_monthly_bps");
        s.sample_start = month(start_col, r);
        s.sample_end = month(end_col, r);
        s.pub_date = month(pub_col, r);
        out.push_back(std::move(s));
    }
    return out;
}

PValueSet load_pvalues(const std::string& path) {
    const CsvTable table = CsvTable::read_file(path);
    std::vector<PValueEntry> entries;
    if (table.header().empty()) return PValueSet{};
    const std::size_t id_col = table.require_column("id");
    const std::size_t p_col = table.require_column("p");
    for (std::size_t r = 0; r < table.rows(); ++r) {
        entries.push_back({table.cell(r, id_col), parse_double(table.cell(r, p_col), table, r, "p")});
    }
    return PValueSet(std::move(entries));
}

}  // namespace pubbias
