#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ctxmine {

enum class ColumnKind { Numeric, Categorical };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    // Categorical only; distinct labels in first-appearance order.
    std::vector<std::string> categories;

    bool operator==(const ColumnSpec&) const = default;
};

/// One cell: a finite real, a category label, or missing.
class Cell {
public:
    Cell() = default;  // missing

    static Cell missing() { return Cell(); }
    static Cell number(double v);
    static Cell category(std::string label);

    bool is_missing() const { return kind_ == Kind::Missing; }
    bool is_number() const { return kind_ == Kind::Number; }
    bool is_category() const { return kind_ == Kind::Category; }

    double number() const;              // throws unless is_number()
    const std::string& label() const;   // throws unless is_category()

    bool operator==(const Cell& other) const;

private:
    enum class Kind { Missing, Number, Category };
    Kind kind_ = Kind::Missing;
    double num_ = 0.0;
    std::string label_;
};

/// Column-typed table with an explicit missingness mask (missing cells).
/// Immutable after construction; operations return new tables.
class Table {
public:
    Table() = default;
    // Validates: unique column names, row widths, numeric cells finite,
    // categorical cells members of their column's categories.
    Table(std::vector<ColumnSpec> schema, std::vector<std::vector<Cell>> rows);

    std::size_t row_count() const { return row_count_; }
    std::size_t col_count() const { return schema_.size(); }
    const std::vector<ColumnSpec>& schema() const { return schema_; }
    const ColumnSpec& column(std::size_t c) const { return schema_.at(c); }

    std::optional<std::size_t> find_column(std::string_view name) const;
    std::size_t column_index(std::string_view name) const;  // throws if absent

    const Cell& at(std::size_t r, std::size_t c) const;
    bool is_missing(std::size_t r, std::size_t c) const { return at(r, c).is_missing(); }
    std::size_t missing_in_column(std::size_t c) const;

    std::vector<std::vector<Cell>> rows_copy() const;

    bool operator==(const Table& other) const;

private:
    std::vector<ColumnSpec> schema_;
    std::vector<Cell> cells_;  // row-major
    std::size_t row_count_ = 0;
    std::unordered_map<std::string, std::size_t> name_to_col_;
};

struct MissingnessPattern {
    std::vector<bool> observed;  // true = observed, per column
    std::size_t count = 0;
};

struct MissingnessSummary {
    // Distinct masks, descending count then mask lexicographic.
    std::vector<MissingnessPattern> patterns;
    // Missing-cell count per column, table column order.
    std::vector<std::size_t> column_missing;
};

/// Dense encoded view of selected columns: categoricals expanded to full
/// one-hot groups, numerics z-scored (sample stddev). means/stddevs are
/// per encoded column; one-hot columns carry the identity pair (0, 1), as
/// do zero-variance numerics (their values encode to all zeros).
struct EncodedMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> column_names;
    std::vector<double> means;
    std::vector<double> stddevs;
};

struct IngestOptions {
    // Unquoted fields equal to any of these become MISSING.
    std::vector<std::string> missing_tokens = {"", "NA"};
    // Overrides for inferred column kinds, by column name.
    std::unordered_map<std::string, ColumnKind> kind_overrides;
};

// CSV: UTF-8, comma separated, mandatory header row, quoted fields with
// doubled-quote escaping, LF or CRLF. Kinds are inferred per column (all
// present fields parse as finite reals -> numeric) unless overridden.
Table ingest_csv(const std::string& path, const IngestOptions& options = {});
Table parse_csv(std::string_view text, const IngestOptions& options = {});

// Serialized tables emit "NA" for MISSING; literal text that would read
// back as missing is quoted.
std::string to_csv(const Table& t);
void write_csv(const Table& t, const std::string& path);

// Replaces every MISSING cell of a categorical column with `label`,
// appending the label to the column's categories if absent.
Table recode_missing_label(const Table& t, std::string_view column, const std::string& label);

MissingnessSummary missingness_patterns(const Table& t);

// Listed columns must contain no MISSING cells.
EncodedMatrix encode_and_scale(const Table& t, const std::vector<std::string>& columns);

// Medal labels to the fixed numeric codes Gold=1, Silver=2, Bronze=3,
// No medal=4. MISSING cells stay missing.
Table encode_medals(const Table& t, std::string_view column);

}  // namespace ctxmine
