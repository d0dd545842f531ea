#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace anthrofit {

// Measurement table: header row of dimension names, one row of mm values per
// subject. Values survive a write/read round trip bit for bit.
struct MeasurementTable {
    std::vector<std::string> names;
    Eigen::MatrixXd values;  // rows = subjects, cols = dimensions

    int subject_count() const { return static_cast<int>(values.rows()); }
    int dimension_count() const { return static_cast<int>(names.size()); }
};

MeasurementTable read_measurement_csv(std::istream& in, const std::string& origin = "csv");
MeasurementTable read_measurement_csv(const std::string& path);

void write_measurement_csv(std::ostream& out, const std::vector<std::string>& names,
                           const Eigen::MatrixXd& values);
void write_measurement_csv(const std::string& path, const std::vector<std::string>& names,
                           const Eigen::MatrixXd& values);

}  // namespace anthrofit
