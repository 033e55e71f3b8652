#include "ocsarc/datagen.hpp"

#include "ocsarc/error.hpp"
#include "ocsarc/format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace ocsarc {

std::uint64_t replicate_seed(std::uint64_t base_seed, std::uint64_t replicate) {
    return base_seed + replicate;
}

namespace {

void check_sim_dim(std::span<const double> x) {
    if (x.size() != kSimDim) {
        throw InvalidInput("simulation covariates have length " + std::to_string(kSimDim) + ", got " +
                           std::to_string(x.size()));
    }
}

}  // namespace

double mu_setting1(std::span<const double> x) {
    check_sim_dim(x);
    const double x1 = x[0], x2 = x[1], x3 = x[2];
    return 4.0 * x1 * (x2 > 0.0 ? 1.0 : 0.0) * std::max(0.5, x3) +
           4.0 * x1 * (x2 <= 0.0 ? 1.0 : 0.0) * std::min(-0.5, x3);
}

double mu_setting2(std::span<const double> x) {
    check_sim_dim(x);
    return 5.0 * x[0] * x[1] + std::exp(x[3] - 1.0);
}

Dataset generate(const SimSetting& setting, std::size_t n, Rng& rng) {
    if (setting.setting_id < 1 || setting.setting_id > 3) {
        throw InvalidInput("simulation setting must be 1, 2 or 3");
    }
    if (!(setting.sigma >= 0.0)) throw InvalidInput("noise sigma must be non-negative");

    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    Dataset out;
    out.response_dim = setting.setting_id == 3 ? 2 : 1;
    out.features = Matrix(n, kSimDim);
    out.responses.reserve(n * out.response_dim);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = out.features.row(i);
        for (auto& v : row) v = unif(rng);
        switch (setting.setting_id) {
            case 1: out.responses.push_back(mu_setting1(row) + setting.sigma * normal(rng)); break;
            case 2: out.responses.push_back(mu_setting2(row) + setting.sigma * normal(rng)); break;
            default: {
                double y1 = mu_setting1(row) + setting.sigma * normal(rng);
                double y2 = mu_setting2(row) + setting.sigma * normal(rng);
                out.responses.push_back(y1);
                out.responses.push_back(y2);
            }
        }
    }
    return out;
}

Dataset generate(const SimSetting& setting, std::size_t n) {
    Rng rng(setting.seed);
    return generate(setting, n, rng);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return std::string(s);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

bool blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

}  // namespace

CsvData parse_csv(std::istream& in, const CsvSchema& schema) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (blank(line)) continue;
        header = split_fields(line);
        break;
    }
    if (header.empty()) throw InvalidInput("CSV input is empty");

    auto column_of = [&](const std::string& name) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw SchemaError("unknown column '" + name + "'");
        if (std::find(it + 1, header.end(), name) != header.end()) {
            throw SchemaError("duplicate column '" + name + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    };

    if (schema.target.empty()) throw SchemaError("no target column declared");
    const std::size_t target_col = column_of(schema.target);
    std::optional<std::size_t> threshold_col;
    if (schema.threshold_column) threshold_col = column_of(*schema.threshold_column);

    std::vector<std::size_t> feature_cols;
    CsvData out;
    if (schema.features.empty()) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c == target_col || (threshold_col && c == *threshold_col)) continue;
            feature_cols.push_back(c);
            out.feature_names.push_back(header[c]);
        }
    } else {
        for (const auto& name : schema.features) {
            feature_cols.push_back(column_of(name));
            out.feature_names.push_back(name);
        }
    }
    if (feature_cols.empty()) throw SchemaError("no feature columns");

    std::vector<double> row(feature_cols.size());
    std::size_t data_row = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        ++data_row;
        auto fields = split_fields(line);
        auto where = [&] {
            return "row " + std::to_string(data_row) + " (line " + std::to_string(line_no) + ")";
        };
        if (fields.size() != header.size()) {
            throw ParseError(where() + ": expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        auto number = [&](std::size_t col) {
            double v = 0.0;
            if (fields[col].empty()) {
                throw ParseError(where() + ": missing value in column '" + header[col] + "'", line_no);
            }
            if (!parse_double(fields[col], v) || std::isnan(v)) {
                throw ParseError(where() + ": non-numeric value '" + fields[col] + "' in column '" +
                                     header[col] + "'",
                                 line_no);
            }
            return v;
        };
        for (std::size_t i = 0; i < feature_cols.size(); ++i) row[i] = number(feature_cols[i]);
        double y = number(target_col);
        if (threshold_col) out.thresholds.push_back(number(*threshold_col));
        out.data.features.append_row(row);
        out.data.responses.push_back(y);
    }
    if (data_row == 0) throw InvalidInput("CSV input has a header but no data rows");
    out.data.response_dim = 1;
    return out;
}

CsvData load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        return parse_csv(in, schema);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what(), e.line());
    }
}

}  // namespace ocsarc
