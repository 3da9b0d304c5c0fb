#include "ctxmine/table.hpp"

#include "ctxmine/util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ctxmine {

// ---------------------------------------------------------------------------
// Cell

Cell Cell::number(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("numeric cell must be finite");
    Cell c;
    c.kind_ = Kind::Number;
    c.num_ = v;
    return c;
}

Cell Cell::category(std::string label) {
    Cell c;
    c.kind_ = Kind::Category;
    c.label_ = std::move(label);
    return c;
}

double Cell::number() const {
    if (kind_ != Kind::Number) throw std::logic_error("cell is not numeric");
    return num_;
}

const std::string& Cell::label() const {
    if (kind_ != Kind::Category) throw std::logic_error("cell is not categorical");
    return label_;
}

bool Cell::operator==(const Cell& other) const {
    if (kind_ != other.kind_) return false;
    switch (kind_) {
        case Kind::Missing: return true;
        case Kind::Number: return num_ == other.num_;
        case Kind::Category: return label_ == other.label_;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Table

Table::Table(std::vector<ColumnSpec> schema, std::vector<std::vector<Cell>> rows)
    : schema_(std::move(schema)), row_count_(rows.size()) {
    std::vector<std::unordered_map<std::string, std::size_t>> category_index(schema_.size());
    for (std::size_t c = 0; c < schema_.size(); ++c) {
        const ColumnSpec& spec = schema_[c];
        if (spec.name.empty()) {
            throw std::invalid_argument("empty column name (column " + std::to_string(c) + ")");
        }
        if (!name_to_col_.emplace(spec.name, c).second) {
            throw std::invalid_argument("duplicate column name '" + spec.name + "'");
        }
        if (spec.kind == ColumnKind::Categorical) {
            for (std::size_t i = 0; i < spec.categories.size(); ++i) {
                if (!category_index[c].emplace(spec.categories[i], i).second) {
                    throw std::invalid_argument("duplicate category '" + spec.categories[i] +
                                                "' in column '" + spec.name + "'");
                }
            }
        } else if (!spec.categories.empty()) {
            throw std::invalid_argument("numeric column '" + spec.name + "' carries categories");
        }
    }

    cells_.reserve(row_count_ * schema_.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != schema_.size()) {
            throw std::invalid_argument("row " + std::to_string(r) + " has " +
                                        std::to_string(rows[r].size()) + " cells, expected " +
                                        std::to_string(schema_.size()));
        }
        for (std::size_t c = 0; c < schema_.size(); ++c) {
            Cell& cell = rows[r][c];
            if (cell.is_number() && schema_[c].kind != ColumnKind::Numeric) {
                throw std::invalid_argument("numeric cell in categorical column '" +
                                            schema_[c].name + "' at row " + std::to_string(r));
            }
            if (cell.is_category()) {
                if (schema_[c].kind != ColumnKind::Categorical) {
                    throw std::invalid_argument("categorical cell in numeric column '" +
                                                schema_[c].name + "' at row " + std::to_string(r));
                }
                if (!category_index[c].count(cell.label())) {
                    throw std::invalid_argument("label '" + cell.label() +
                                                "' not among categories of column '" +
                                                schema_[c].name + "'");
                }
            }
            cells_.push_back(std::move(cell));
        }
    }
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
    auto it = name_to_col_.find(std::string(name));
    if (it == name_to_col_.end()) return std::nullopt;
    return it->second;
}

std::size_t Table::column_index(std::string_view name) const {
    auto idx = find_column(name);
    if (!idx) throw std::invalid_argument("no column named '" + std::string(name) + "'");
    return *idx;
}

const Cell& Table::at(std::size_t r, std::size_t c) const {
    if (r >= row_count_ || c >= schema_.size()) throw std::out_of_range("cell index out of range");
    return cells_[r * schema_.size() + c];
}

std::size_t Table::missing_in_column(std::size_t c) const {
    std::size_t n = 0;
    for (std::size_t r = 0; r < row_count_; ++r) {
        if (at(r, c).is_missing()) ++n;
    }
    return n;
}

std::vector<std::vector<Cell>> Table::rows_copy() const {
    std::vector<std::vector<Cell>> rows(row_count_);
    for (std::size_t r = 0; r < row_count_; ++r) {
        rows[r].assign(cells_.begin() + static_cast<std::ptrdiff_t>(r * schema_.size()),
                       cells_.begin() + static_cast<std::ptrdiff_t>((r + 1) * schema_.size()));
    }
    return rows;
}

bool Table::operator==(const Table& other) const {
    return schema_ == other.schema_ && row_count_ == other.row_count_ && cells_ == other.cells_;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

struct RawField {
    std::string text;
    bool quoted = false;
};

struct RawRecord {
    std::vector<RawField> fields;
    std::size_t line = 0;  // 1-based line where the record starts
};

std::vector<RawRecord> split_csv_records(std::string_view text) {
    std::vector<RawRecord> records;
    std::size_t i = 0;
    const std::size_t n = text.size();
    std::size_t line = 1;
    while (i < n) {
        RawRecord rec;
        rec.line = line;
        for (;;) {
            RawField f;
            if (i < n && text[i] == '"') {
                f.quoted = true;
                ++i;
                for (;;) {
                    if (i >= n) {
                        throw std::runtime_error("unterminated quoted field starting at line " +
                                                 std::to_string(rec.line));
                    }
                    const char c = text[i];
                    if (c == '"') {
                        if (i + 1 < n && text[i + 1] == '"') {
                            f.text.push_back('"');
                            i += 2;
                        } else {
                            ++i;
                            break;
                        }
                    } else {
                        if (c == '\n') ++line;
                        f.text.push_back(c);
                        ++i;
                    }
                }
            } else {
                while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
                    f.text.push_back(text[i]);
                    ++i;
                }
            }
            rec.fields.push_back(std::move(f));
            if (i < n && text[i] == ',') {
                ++i;
                continue;
            }
            break;
        }
        if (i < n && text[i] == '\r') ++i;
        if (i < n && text[i] == '\n') {
            ++i;
            ++line;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

bool is_missing_field(const RawField& f, const IngestOptions& options) {
    if (f.quoted) return false;  // quoted fields are always literal text
    return std::find(options.missing_tokens.begin(), options.missing_tokens.end(), f.text) !=
           options.missing_tokens.end();
}

std::string csv_escape(const std::string& s) {
    const bool needs_quote = s.empty() || s == "NA" ||
                             s.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quote) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

Table parse_csv(std::string_view text, const IngestOptions& options) {
    const std::vector<RawRecord> records = split_csv_records(text);
    if (records.empty()) throw std::runtime_error("CSV has no header row");

    const RawRecord& header = records[0];
    const std::size_t ncols = header.fields.size();
    std::vector<ColumnSpec> schema(ncols);
    for (std::size_t c = 0; c < ncols; ++c) schema[c].name = header.fields[c].text;

    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].fields.size() != ncols) {
            throw std::runtime_error("line " + std::to_string(records[r].line) + ": row has " +
                                     std::to_string(records[r].fields.size()) +
                                     " fields, expected " + std::to_string(ncols));
        }
    }

    // Kind per column: override wins, otherwise numeric iff every present
    // field parses as a finite real.
    for (std::size_t c = 0; c < ncols; ++c) {
        auto ov = options.kind_overrides.find(schema[c].name);
        if (ov != options.kind_overrides.end()) {
            schema[c].kind = ov->second;
            continue;
        }
        bool all_numeric = true;
        for (std::size_t r = 1; r < records.size() && all_numeric; ++r) {
            const RawField& f = records[r].fields[c];
            if (is_missing_field(f, options)) continue;
            if (!parse_double(f.text)) all_numeric = false;
        }
        schema[c].kind = all_numeric ? ColumnKind::Numeric : ColumnKind::Categorical;
    }

    std::vector<std::unordered_map<std::string, std::size_t>> seen(ncols);
    std::vector<std::vector<Cell>> rows;
    rows.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        std::vector<Cell> row(ncols);
        for (std::size_t c = 0; c < ncols; ++c) {
            const RawField& f = records[r].fields[c];
            if (is_missing_field(f, options)) continue;
            if (schema[c].kind == ColumnKind::Numeric) {
                auto v = parse_double(f.text);
                if (!v) {
                    throw std::runtime_error("line " + std::to_string(records[r].line) +
                                             ": value '" + f.text + "' in numeric column '" +
                                             schema[c].name + "' is not a finite real");
                }
                row[c] = Cell::number(*v);
            } else {
                if (seen[c].emplace(f.text, schema[c].categories.size()).second) {
                    schema[c].categories.push_back(f.text);
                }
                row[c] = Cell::category(f.text);
            }
        }
        rows.push_back(std::move(row));
    }
    return Table(std::move(schema), std::move(rows));
}

Table ingest_csv(const std::string& path, const IngestOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), options);
}

std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t c = 0; c < t.col_count(); ++c) {
        if (c) out.push_back(',');
        out += csv_escape(t.column(c).name);
    }
    out.push_back('\n');
    for (std::size_t r = 0; r < t.row_count(); ++r) {
        for (std::size_t c = 0; c < t.col_count(); ++c) {
            if (c) out.push_back(',');
            const Cell& cell = t.at(r, c);
            if (cell.is_missing()) {
                out += "NA";
            } else if (cell.is_number()) {
                out += format_double(cell.number());
            } else {
                out += csv_escape(cell.label());
            }
        }
        out.push_back('\n');
    }
    return out;
}

void write_csv(const Table& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << to_csv(t);
}

// ---------------------------------------------------------------------------
// Operations

Table recode_missing_label(const Table& t, std::string_view column, const std::string& label) {
    const std::size_t c = t.column_index(column);
    if (t.column(c).kind != ColumnKind::Categorical) {
        throw std::invalid_argument("recode_missing_label: column '" + std::string(column) +
                                    "' is numeric");
    }
    std::vector<std::vector<Cell>> rows = t.rows_copy();
    std::size_t recoded = 0;
    for (auto& row : rows) {
        if (row[c].is_missing()) {
            row[c] = Cell::category(label);
            ++recoded;
        }
    }
    std::vector<ColumnSpec> schema = t.schema();
    auto& cats = schema[c].categories;
    if (recoded > 0 && std::find(cats.begin(), cats.end(), label) == cats.end())
        cats.push_back(label);
    return Table(std::move(schema), std::move(rows));
}

MissingnessSummary missingness_patterns(const Table& t) {
    MissingnessSummary out;
    out.column_missing.assign(t.col_count(), 0);
    std::map<std::vector<bool>, std::size_t> counts;
    for (std::size_t r = 0; r < t.row_count(); ++r) {
        std::vector<bool> mask(t.col_count());
        for (std::size_t c = 0; c < t.col_count(); ++c) {
            const bool missing = t.is_missing(r, c);
            mask[c] = !missing;
            if (missing) ++out.column_missing[c];
        }
        ++counts[mask];
    }
    out.patterns.reserve(counts.size());
    for (const auto& [mask, count] : counts) out.patterns.push_back({mask, count});
    std::sort(out.patterns.begin(), out.patterns.end(),
              [](const MissingnessPattern& a, const MissingnessPattern& b) {
                  if (a.count != b.count) return a.count > b.count;
                  return a.observed < b.observed;
              });
    return out;
}

EncodedMatrix encode_and_scale(const Table& t, const std::vector<std::string>& columns) {
    const std::size_t n = t.row_count();
    std::vector<std::size_t> idx;
    idx.reserve(columns.size());
    std::size_t width = 0;
    for (const auto& name : columns) {
        const std::size_t c = t.column_index(name);
        idx.push_back(c);
        for (std::size_t r = 0; r < n; ++r) {
            if (t.is_missing(r, c)) {
                throw std::invalid_argument("encode_and_scale: column '" + name +
                                            "' has a MISSING cell at row " + std::to_string(r));
            }
        }
        width += t.column(c).kind == ColumnKind::Numeric ? 1 : t.column(c).categories.size();
    }

    EncodedMatrix m;
    m.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(width));
    m.column_names.reserve(width);
    m.means.reserve(width);
    m.stddevs.reserve(width);

    std::size_t col = 0;
    for (const std::size_t c : idx) {
        const ColumnSpec& spec = t.column(c);
        if (spec.kind == ColumnKind::Numeric) {
            double mean = 0.0;
            for (std::size_t r = 0; r < n; ++r) mean += t.at(r, c).number();
            if (n > 0) mean /= static_cast<double>(n);
            double ss = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                const double d = t.at(r, c).number() - mean;
                ss += d * d;
            }
            const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
            if (sd > 0.0) {
                for (std::size_t r = 0; r < n; ++r) {
                    m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col)) =
                        (t.at(r, c).number() - mean) / sd;
                }
                m.stddevs.push_back(sd);
            } else {
                // Zero variance: encode as zeros, stddev sentinel 1 keeps
                // unscaling (x = scaled*sd + mean) exact.
                m.stddevs.push_back(1.0);
            }
            m.means.push_back(mean);
            m.column_names.push_back(spec.name);
            ++col;
        } else {
            std::unordered_map<std::string, std::size_t> cat_pos;
            for (std::size_t i = 0; i < spec.categories.size(); ++i) {
                cat_pos.emplace(spec.categories[i], i);
                m.column_names.push_back(spec.name + "=" + spec.categories[i]);
                m.means.push_back(0.0);
                m.stddevs.push_back(1.0);
            }
            for (std::size_t r = 0; r < n; ++r) {
                const std::size_t k = cat_pos.at(t.at(r, c).label());
                m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col + k)) = 1.0;
            }
            col += spec.categories.size();
        }
    }
    return m;
}

Table encode_medals(const Table& t, std::string_view column) {
    static const std::unordered_map<std::string, double> kMedalCodes = {
        {"Gold", 1.0}, {"Silver", 2.0}, {"Bronze", 3.0}, {"No medal", 4.0}};

    const std::size_t c = t.column_index(column);
    if (t.column(c).kind != ColumnKind::Categorical) {
        throw std::invalid_argument("encode_medals: column '" + std::string(column) +
                                    "' is not categorical");
    }
    for (const auto& cat : t.column(c).categories) {
        if (!kMedalCodes.count(cat)) {
            throw std::invalid_argument("encode_medals: unexpected category label '" + cat +
                                        "' in column '" + std::string(column) + "'");
        }
    }
    std::vector<ColumnSpec> schema = t.schema();
    schema[c].kind = ColumnKind::Numeric;
    schema[c].categories.clear();

    std::vector<std::vector<Cell>> rows = t.rows_copy();
    for (auto& row : rows) {
        if (!row[c].is_missing()) row[c] = Cell::number(kMedalCodes.at(row[c].label()));
    }
    return Table(std::move(schema), std::move(rows));
}

}  // namespace ctxmine
