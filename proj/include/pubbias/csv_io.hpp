#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pubbias/estimation.hpp"
#include "pubbias/multiple_testing.hpp"

namespace pubbias {

/// Minimal CSV reader: one header line, comma separated, optional double
/// quotes, lines starting with '#' skipped.
class CsvTable {
public:
    static CsvTable read_file(const std::string& path);
    static CsvTable parse(std::string_view text, std::string source = "<memory>");

    const std::vector<std::string>& header() const noexcept { return header_; }
    std::size_t rows() const noexcept { return rows_.size(); }
    std::optional<std::size_t> column(std::string_view name) const;
    /// Throws DataError naming the source when the column is absent.
    std::size_t require_column(std::string_view name) const;
    const std::string& cell(std::size_t row, std::size_t col) const { return rows_[row][col]; }
    /// 1-based line number of a data row in the source file.
    std::size_t line_of(std::size_t row) const { return lines_[row]; }
    const std::string& source() const noexcept { return source_; }

private:
    std::string source_;
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::size_t> lines_;
};

/// Parses a finite double; throws DataError with the location on failure.
double parse_double(const std::string& text, const CsvTable& table, std::size_t row,
                    std::string_view column);

/// t-stat CSV: id, tstat, [se_monthly_bps, sample_start, sample_end, pub_date].
std::vector<TStatSample> load_tstats(const std::string& path);
/// p-value CSV: id, p.
PValueSet load_pvalues(const std::string& path);

}  // namespace pubbias
