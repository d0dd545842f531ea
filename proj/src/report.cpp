#include "anthrofit/report.hpp"

#include "anthrofit/errors.hpp"
#include "anthrofit/num_format.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace anthrofit {

EvaluationReport evaluate_errors(const std::vector<std::string>& names,
                                 const std::vector<std::string>& groups,
                                 const Eigen::MatrixXd& measured, const Eigen::MatrixXd& targets) {
    const Eigen::Index q = static_cast<Eigen::Index>(names.size());
    if (groups.size() != names.size())
        throw InputError("group labels do not match dimension names");
    if (measured.cols() != q || targets.cols() != q)
        throw InputError("measurement columns do not match dimension names");
    if (measured.rows() != targets.rows())
        throw InputError("measured and target subject counts differ");
    if (measured.rows() < 1) throw InputError("evaluation needs at least one subject");
    if (!measured.allFinite() || !targets.allFinite())
        throw NumericalError("evaluation input contains non-finite values");

    EvaluationReport report;
    report.names = names;
    report.errors = (measured - targets).cwiseAbs();
    report.average = report.errors.colwise().mean();
    report.maximum = report.errors.colwise().maxCoeff();
    report.overall_average = report.errors.mean();
    for (Eigen::Index j = 0; j < q; ++j) {
        const std::string& group = groups[static_cast<size_t>(j)];
        if (group.empty()) continue;
        auto it = report.group_errors.find(group);
        if (it == report.group_errors.end())
            it = report.group_errors
                     .emplace(group, Eigen::VectorXd::Zero(report.errors.rows()))
                     .first;
        it->second += report.errors.col(j);
    }
    return report;
}

namespace {

nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::ordered_json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::ordered_json array = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) array.push_back(v[i]);
    return array;
}

std::string pad(const std::string& text, size_t width) {
    std::string out = text;
    if (out.size() < width) out.append(width - out.size(), ' ');
    return out;
}

std::string num(double value) { return format_double(value, 6); }

// One table row: name column plus numeric cells.
struct Row {
    std::string name;
    std::vector<std::string> cells;
};

std::string render_table(const std::vector<std::string>& headers, const std::vector<Row>& rows) {
    size_t name_width = headers.empty() ? 0 : headers[0].size();
    for (const auto& row : rows) name_width = std::max(name_width, row.name.size());
    std::vector<size_t> widths(headers.size() > 0 ? headers.size() - 1 : 0);
    for (size_t c = 0; c < widths.size(); ++c) widths[c] = headers[c + 1].size();
    for (const auto& row : rows)
        for (size_t c = 0; c < row.cells.size() && c < widths.size(); ++c)
            widths[c] = std::max(widths[c], row.cells[c].size());

    std::ostringstream out;
    out << pad(headers[0], name_width);
    for (size_t c = 0; c + 1 < headers.size(); ++c) out << "  " << pad(headers[c + 1], widths[c]);
    out << '\n';
    for (const auto& row : rows) {
        out << pad(row.name, name_width);
        for (size_t c = 0; c < row.cells.size(); ++c) out << "  " << pad(row.cells[c], widths[c]);
        out << '\n';
    }
    return out.str();
}

}  // namespace

nlohmann::ordered_json report_to_json(const EvaluationReport& report) {
    nlohmann::ordered_json doc;
    doc["dimensions"] = report.names;
    doc["errors"] = matrix_to_json(report.errors);
    doc["average"] = vector_to_json(report.average);
    doc["maximum"] = vector_to_json(report.maximum);
    doc["overall_average"] = report.overall_average;
    nlohmann::ordered_json groups;
    for (const auto& [label, per_subject] : report.group_errors) {
        nlohmann::ordered_json entry;
        entry["per_subject"] = vector_to_json(per_subject);
        entry["average"] = per_subject.mean();
        entry["maximum"] = per_subject.maxCoeff();
        groups[label] = std::move(entry);
    }
    doc["groups"] = std::move(groups);
    return doc;
}

std::string report_table(const EvaluationReport& report, const std::string& label) {
    std::vector<Row> rows;
    for (size_t j = 0; j < report.names.size(); ++j) {
        Eigen::Index col = static_cast<Eigen::Index>(j);
        rows.push_back({report.names[j], {num(report.average[col]), num(report.maximum[col])}});
    }
    for (const auto& [group, per_subject] : report.group_errors)
        rows.push_back(
            {"[group] " + group, {num(per_subject.mean()), num(per_subject.maxCoeff())}});
    rows.push_back({"overall average", {num(report.overall_average)}});
    return render_table({"dimension (" + label + ")", "avg", "max"}, rows);
}

std::string comparison_table(const EvaluationReport& a, const EvaluationReport& b,
                             const std::string& label_a, const std::string& label_b) {
    if (a.names != b.names) throw InputError("reports being compared measure different dimensions");
    std::vector<Row> rows;
    for (size_t j = 0; j < a.names.size(); ++j) {
        Eigen::Index col = static_cast<Eigen::Index>(j);
        rows.push_back({a.names[j],
                        {num(a.average[col]), num(a.maximum[col]), num(b.average[col]),
                         num(b.maximum[col])}});
    }
    for (const auto& [group, per_subject] : a.group_errors) {
        auto it = b.group_errors.find(group);
        if (it == b.group_errors.end()) continue;
        rows.push_back({"[group] " + group,
                        {num(per_subject.mean()), num(per_subject.maxCoeff()),
                         num(it->second.mean()), num(it->second.maxCoeff())}});
    }
    rows.push_back({"overall average", {num(a.overall_average), "", num(b.overall_average), ""}});
    return render_table({"dimension", label_a + " avg", label_a + " max", label_b + " avg",
                         label_b + " max"},
                        rows);
}

}  // namespace anthrofit
