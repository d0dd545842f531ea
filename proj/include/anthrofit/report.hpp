#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace anthrofit {

// Absolute measurement errors for a set of predicted shapes against their
// target vectors, plus the aggregates the tables are built from.
struct EvaluationReport {
    std::vector<std::string> names;  // q dimension names
    Eigen::MatrixXd errors;          // subjects x q, |measured - target| in mm
    Eigen::VectorXd average;         // per-dimension mean over subjects
    Eigen::VectorXd maximum;         // per-dimension max over subjects
    double overall_average = 0.0;    // mean over every entry of errors
    // group label -> per-subject sum of the member dimensions' errors
    std::map<std::string, Eigen::VectorXd> group_errors;

    int subject_count() const { return static_cast<int>(errors.rows()); }
};

// groups[j] is dimension j's composite label, empty for ungrouped dimensions.
EvaluationReport evaluate_errors(const std::vector<std::string>& names,
                                 const std::vector<std::string>& groups,
                                 const Eigen::MatrixXd& measured, const Eigen::MatrixXd& targets);

nlohmann::ordered_json report_to_json(const EvaluationReport& report);

// Per-dimension avg/max table for one method.
std::string report_table(const EvaluationReport& report, const std::string& label);

// Side-by-side avg/max table for two methods sharing a dimension list.
std::string comparison_table(const EvaluationReport& a, const EvaluationReport& b,
                             const std::string& label_a, const std::string& label_b);

}  // namespace anthrofit
