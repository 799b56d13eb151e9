#include "fhvar/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "fhvar/errors.hpp"

namespace fhvar {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open '" + path.string() + "'");
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(line);
    }
    if (lines.empty()) {
        throw ValidationError("'" + path.string() + "' is empty");
    }
    return lines;
}

double parse_cell(const std::string& cell, const std::string& column, std::size_t row) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || cell.empty()) {
        throw ValidationError("invalid numeric value '" + cell + "' in column '" + column +
                              "' (row " + std::to_string(row) + ")");
    }
    return value;
}

// Positions of z1..zp (or w1..wq) verifying contiguous numbering.
std::vector<std::size_t> covariate_columns(const std::vector<std::string>& header,
                                           const std::string& prefix) {
    std::vector<std::pair<int, std::size_t>> found;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& name = header[c];
        if (name.size() > prefix.size() && name.compare(0, prefix.size(), prefix) == 0 &&
            std::all_of(name.begin() + static_cast<std::ptrdiff_t>(prefix.size()), name.end(),
                        [](unsigned char ch) { return std::isdigit(ch); })) {
            found.emplace_back(std::stoi(name.substr(prefix.size())), c);
        }
    }
    std::sort(found.begin(), found.end());
    std::vector<std::size_t> columns;
    for (std::size_t k = 0; k < found.size(); ++k) {
        if (found[k].first != static_cast<int>(k) + 1) {
            throw ValidationError("covariate columns must be numbered " + prefix + "1.." +
                                  prefix + "<k> without gaps");
        }
        columns.push_back(found[k].second);
    }
    return columns;
}

void append_parameter_block(ordered_json& parameters, const Summary& summary,
                            const std::vector<double>& interval_levels) {
    const auto level_index = [&](double level) {
        for (std::size_t l = 0; l < summary.levels.size(); ++l) {
            if (summary.levels[l] == level) {
                return static_cast<Eigen::Index>(l);
            }
        }
        throw ValidationError("summary is missing a requested quantile level");
    };
    const Eigen::Index median = level_index(0.5);

    for (std::size_t j = 0; j < summary.names.size(); ++j) {
        const Eigen::Index row = static_cast<Eigen::Index>(j);
        ordered_json entry;
        entry["mean"] = summary.mean(row);
        entry["sd"] = summary.sd(row);
        entry["median"] = summary.quantiles(row, median);
        ordered_json ci;
        for (double level : interval_levels) {
            ci[format_double(level)] = {summary.quantiles(row, level_index(0.5 * (1.0 - level))),
                                        summary.quantiles(row, level_index(0.5 * (1.0 + level)))};
        }
        entry["ci"] = std::move(ci);
        parameters[summary.names[j]] = std::move(entry);
    }
}

ordered_json method_row_to_json(const MethodPerformance& row) {
    ordered_json j;
    j["method"] = row.method;
    j["mse_theta"] = row.mse_theta;
    j["bias_theta"] = row.bias_theta;
    j["mse_sigma2"] = row.mse_sigma2;
    j["bias_sigma2"] = row.bias_sigma2;
    if (row.cp95.has_value()) j["cp95"] = *row.cp95; else j["cp95"] = nullptr;
    if (row.cp99.has_value()) j["cp99"] = *row.cp99; else j["cp99"] = nullptr;
    return j;
}

}  // namespace

std::string format_double(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc()) {
        throw NumericError("failed to format a double");
    }
    return std::string(buffer, ptr);
}

double parse_double(const std::string& text) {
    return parse_cell(text, "<value>", 0);
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    const std::vector<std::string> header = split_csv_line(lines.front());

    const auto find_column = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw ValidationError("missing required column '" + name + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t col_x = find_column("x");
    const std::size_t col_s2 = find_column("s2");
    const std::size_t col_n = find_column("n");
    const std::vector<std::size_t> col_z = covariate_columns(header, "z");
    const std::vector<std::size_t> col_w = covariate_columns(header, "w");

    {
        std::vector<std::string> sorted_header = header;
        std::sort(sorted_header.begin(), sorted_header.end());
        if (std::adjacent_find(sorted_header.begin(), sorted_header.end()) !=
            sorted_header.end()) {
            throw ValidationError("duplicate column in header");
        }
    }
    const std::size_t known = 3 + col_z.size() + col_w.size();
    if (header.size() != known) {
        for (std::size_t c = 0; c < header.size(); ++c) {
            const bool is_known = c == col_x || c == col_s2 || c == col_n ||
                                  std::find(col_z.begin(), col_z.end(), c) != col_z.end() ||
                                  std::find(col_w.begin(), col_w.end(), c) != col_w.end();
            if (!is_known) {
                throw ValidationError("unknown column '" + header[c] + "'");
            }
        }
    }

    std::vector<AreaObservation> areas;
    areas.reserve(lines.size() - 1);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        if (lines[r].empty()) {
            continue;  // ignore trailing blank lines
        }
        const std::size_t row = r;  // 1-based data row (header is row 0)
        const std::vector<std::string> cells = split_csv_line(lines[r]);
        if (cells.size() != header.size()) {
            throw ValidationError("wrong number of cells (row " + std::to_string(row) + ")");
        }

        AreaObservation area;
        area.x = parse_cell(cells[col_x], "x", row);
        area.s2 = parse_cell(cells[col_s2], "s2", row);
        if (!(area.s2 > 0.0)) {
            throw ValidationError("s2 must be positive (row " + std::to_string(row) + ")");
        }
        const double n_value = parse_cell(cells[col_n], "n", row);
        if (n_value != std::floor(n_value) || n_value > 1e9) {
            throw ValidationError("n must be an integer (row " + std::to_string(row) + ")");
        }
        area.n = static_cast<int>(n_value);
        if (area.n < 2) {
            throw ValidationError("n must be at least 2 (row " + std::to_string(row) + ")");
        }
        area.z.resize(static_cast<Eigen::Index>(col_z.size()));
        for (std::size_t k = 0; k < col_z.size(); ++k) {
            area.z(static_cast<Eigen::Index>(k)) =
                parse_cell(cells[col_z[k]], "z" + std::to_string(k + 1), row);
        }
        area.w.resize(static_cast<Eigen::Index>(col_w.size()));
        for (std::size_t k = 0; k < col_w.size(); ++k) {
            area.w(static_cast<Eigen::Index>(k)) =
                parse_cell(cells[col_w[k]], "w" + std::to_string(k + 1), row);
        }
        areas.push_back(std::move(area));
    }
    return Dataset(std::move(areas));
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write '" + path.string() + "'");
    }
    out << "x,s2,n";
    for (Eigen::Index k = 1; k <= dataset.p(); ++k) out << ",z" << k;
    for (Eigen::Index k = 1; k <= dataset.q(); ++k) out << ",w" << k;
    out << "\n";
    for (Eigen::Index i = 0; i < dataset.m(); ++i) {
        const AreaObservation& area = dataset.area(i);
        out << format_double(area.x) << ',' << format_double(area.s2) << ',' << area.n;
        for (Eigen::Index k = 0; k < dataset.p(); ++k) out << ',' << format_double(area.z(k));
        for (Eigen::Index k = 0; k < dataset.q(); ++k) out << ',' << format_double(area.w(k));
        out << "\n";
    }
    if (!out.good()) {
        throw ValidationError("failed while writing '" + path.string() + "'");
    }
}

void write_draws_csv(const std::filesystem::path& path, const PosteriorDraws& draws) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write '" + path.string() + "'");
    }
    out << "draw";
    for (const std::string& name : draws.names()) {
        out << ',' << name;
    }
    out << "\n";
    for (std::size_t r = 0; r < draws.n_draws(); ++r) {
        out << (r + 1);
        const Eigen::VectorXd flat = flatten(draws.states()[r]);
        for (Eigen::Index j = 0; j < flat.size(); ++j) {
            out << ',' << format_double(flat(j));
        }
        out << "\n";
    }
    if (!out.good()) {
        throw ValidationError("failed while writing '" + path.string() + "'");
    }
}

DrawsTable read_draws_csv(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    const std::vector<std::string> header = split_csv_line(lines.front());
    if (header.empty() || header.front() != "draw") {
        throw ValidationError("draws CSV must start with a 'draw' column");
    }

    DrawsTable table;
    table.names.assign(header.begin() + 1, header.end());
    std::vector<Eigen::VectorXd> rows;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        if (lines[r].empty()) {
            continue;
        }
        const std::vector<std::string> cells = split_csv_line(lines[r]);
        if (cells.size() != header.size()) {
            throw ValidationError("wrong number of cells (row " + std::to_string(r) + ")");
        }
        Eigen::VectorXd row(static_cast<Eigen::Index>(table.names.size()));
        for (std::size_t c = 1; c < cells.size(); ++c) {
            row(static_cast<Eigen::Index>(c - 1)) = parse_cell(cells[c], header[c], r);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw ValidationError("draws CSV contains no draws");
    }
    table.values.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(table.names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        table.values.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    }
    return table;
}

std::string condition_report_to_json(const ConditionReport& report) {
    ordered_json j;
    j["proper"] = report.proper;
    j["finite_variance"] = report.finite_variance;
    ordered_json violations = ordered_json::array();
    for (const ConditionViolation& v : report.violations) {
        violations.push_back({{"name", v.name}, {"detail", v.detail}});
    }
    j["violations"] = std::move(violations);
    ordered_json t = ordered_json::array();
    for (Eigen::Index k = 0; k < report.t.size(); ++k) {
        t.push_back(report.t(k));
    }
    j["t"] = std::move(t);
    return j.dump(2);
}

std::string condition_report_to_text(const ConditionReport& report) {
    std::ostringstream out;
    out << "proper: " << (report.proper ? "yes" : "no") << "\n";
    out << "finite posterior variances: " << (report.finite_variance ? "yes" : "no") << "\n";
    if (!report.violations.empty()) {
        out << "violated conditions:\n";
        for (const ConditionViolation& v : report.violations) {
            out << "  - " << v.name << ": " << v.detail << "\n";
        }
    }
    return out.str();
}

std::vector<double> quantile_levels_for_intervals(const std::vector<double>& interval_levels) {
    std::vector<double> levels{0.5};
    for (double level : interval_levels) {
        levels.push_back(0.5 * (1.0 - level));
        levels.push_back(0.5 * (1.0 + level));
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    return levels;
}

std::string fit_summary_to_json(const Summary& summary, const std::vector<double>& interval_levels,
                                const FitMeta& meta) {
    ordered_json j;
    j["model"] = meta.model;
    j["seed"] = meta.seed;
    j["burn_in"] = meta.burn_in;
    j["draws"] = meta.draws;
    j["thin"] = meta.thin;
    if (meta.mh_accept_rate.has_value()) j["mh_accept_rate"] = *meta.mh_accept_rate;
    if (meta.dic.has_value()) j["dic"] = *meta.dic;
    if (meta.mean_deviance.has_value()) j["mean_deviance"] = *meta.mean_deviance;
    j["levels"] = interval_levels;
    ordered_json parameters;
    append_parameter_block(parameters, summary, interval_levels);
    j["parameters"] = std::move(parameters);
    return j.dump(2);
}

std::string bare_summary_to_json(const Summary& summary,
                                 const std::vector<double>& interval_levels) {
    ordered_json j;
    j["levels"] = interval_levels;
    ordered_json parameters;
    append_parameter_block(parameters, summary, interval_levels);
    j["parameters"] = std::move(parameters);
    return j.dump(2);
}

std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "method,mse_theta,bias_theta,mse_sigma2,bias_sigma2,cp95,cp99\n";
    for (const MethodPerformance& row : report.rows) {
        out << row.method << ',' << format_double(row.mse_theta) << ','
            << format_double(row.bias_theta) << ',' << format_double(row.mse_sigma2) << ','
            << format_double(row.bias_sigma2) << ','
            << (row.cp95.has_value() ? format_double(*row.cp95) : "") << ','
            << (row.cp99.has_value() ? format_double(*row.cp99) : "") << "\n";
    }
    return out.str();
}

std::string report_to_json(const ExperimentReport& report) {
    ordered_json rows = ordered_json::array();
    for (const MethodPerformance& row : report.rows) {
        rows.push_back(method_row_to_json(row));
    }
    ordered_json j;
    j["rows"] = std::move(rows);
    return j.dump(2);
}

}  // namespace fhvar
