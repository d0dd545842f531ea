#include "anthrofit/csv.hpp"

#include "anthrofit/errors.hpp"
#include "anthrofit/num_format.hpp"

#include <fstream>
#include <sstream>

namespace anthrofit {
namespace {

std::string trim(const std::string& text) {
    size_t first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    size_t last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

}  // namespace

MeasurementTable read_measurement_csv(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line)) throw InputError(origin + ": missing header row");

    MeasurementTable table;
    for (const auto& field : split_row(line)) {
        std::string name = trim(field);
        if (name.empty()) throw InputError(origin + ": empty column name in header");
        table.names.push_back(std::move(name));
    }
    const size_t q = table.names.size();

    std::vector<double> data;
    int rows = 0;
    int line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = split_row(line);
        if (fields.size() != q)
            throw InputError(origin + ":" + std::to_string(line_number) + ": expected " +
                             std::to_string(q) + " fields, got " + std::to_string(fields.size()));
        for (const auto& field : fields) {
            double value = 0.0;
            if (!parse_double(field, value))
                throw InputError(origin + ":" + std::to_string(line_number) +
                                 ": not a number: '" + trim(field) + "'");
            data.push_back(value);
        }
        ++rows;
    }

    table.values.resize(rows, static_cast<Eigen::Index>(q));
    for (int i = 0; i < rows; ++i)
        for (size_t j = 0; j < q; ++j)
            table.values(i, static_cast<Eigen::Index>(j)) = data[i * q + j];
    return table;
}

MeasurementTable read_measurement_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return read_measurement_csv(in, path);
}

void write_measurement_csv(std::ostream& out, const std::vector<std::string>& names,
                           const Eigen::MatrixXd& values) {
    if (values.rows() > 0 && values.cols() != static_cast<Eigen::Index>(names.size()))
        throw InputError("csv value columns do not match header names");
    for (size_t j = 0; j < names.size(); ++j) {
        if (names[j].find(',') != std::string::npos)
            throw InputError("csv column name contains a comma: " + names[j]);
        out << (j ? "," : "") << names[j];
    }
    out << '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j)
            out << (j ? "," : "") << format_double(values(i, j));
        out << '\n';
    }
    if (!out) throw InputError("csv write failed");
}

void write_measurement_csv(const std::string& path, const std::vector<std::string>& names,
                           const Eigen::MatrixXd& values) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path + " for writing");
    write_measurement_csv(out, names, values);
}

}  // namespace anthrofit
