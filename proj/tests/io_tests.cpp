#include "anthrofit/csv.hpp"
#include "anthrofit/errors.hpp"
#include "anthrofit/num_format.hpp"
#include "anthrofit/report.hpp"
#include "anthrofit/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

using namespace anthrofit;

namespace {

bool same_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

}  // namespace

TEST_CASE("doubles survive formatting round trips") {
    for (double value : {0.0, -0.0, 0.1, 1.0 / 3.0, -3.5e17, 1e-300, 123456.789,
                         2.2250738585072014e-308}) {
        double parsed = 0.0;
        REQUIRE(parse_double(format_double(value), parsed));
        CHECK(parsed == value);
    }
    double out = 0.0;
    CHECK(parse_double("  1.5\t", out));
    CHECK(out == 1.5);
    CHECK(!parse_double("", out));
    CHECK(!parse_double("   ", out));
    CHECK(!parse_double("abc", out));
    CHECK(!parse_double("1.5x", out));
    CHECK(format_double(0.25) == "0.25");
}

TEST_CASE("measurement csv round trips bit for bit") {
    std::vector<std::string> names{"height", "span", "girth"};
    Rng rng(41);
    Eigen::MatrixXd values(4, 3);
    for (int i = 0; i < values.rows(); ++i)
        for (int j = 0; j < values.cols(); ++j)
            values(i, j) =
                rng.uniform(-1.0, 1.0) * std::pow(10.0, static_cast<int>(rng.index(21)) - 10);

    std::stringstream stream;
    write_measurement_csv(stream, names, values);
    MeasurementTable table = read_measurement_csv(stream, "mem");
    CHECK(table.names == names);
    CHECK(same_matrix(table.values, values));

    auto dir = std::filesystem::temp_directory_path() / "anthrofit_csv_test";
    std::filesystem::create_directories(dir);
    std::string path = (dir / "table.csv").string();
    write_measurement_csv(path, names, values);
    MeasurementTable reread = read_measurement_csv(path);
    CHECK(reread.names == names);
    CHECK(same_matrix(reread.values, values));
    std::filesystem::remove_all(dir);

    std::stringstream empty_rows("a,b\n\n  \n");
    MeasurementTable header_only = read_measurement_csv(empty_rows, "mem");
    CHECK(header_only.names == std::vector<std::string>{"a", "b"});
    CHECK(header_only.values.rows() == 0);
}

TEST_CASE("csv errors carry their origin and line") {
    auto read = [](const std::string& text) {
        std::stringstream stream(text);
        return read_measurement_csv(stream, "input.csv");
    };
    CHECK_THROWS_WITH_AS(read(""), "input.csv: missing header row", InputError);
    CHECK_THROWS_WITH_AS(read("a,,c\n"), "input.csv: empty column name in header", InputError);
    CHECK_THROWS_WITH_AS(read("a,b,c\n1,2,3\n4,5\n"),
                         "input.csv:3: expected 3 fields, got 2", InputError);
    CHECK_THROWS_WITH_AS(read("a,b\n1,oops\n"), "input.csv:2: not a number: 'oops'", InputError);

    std::stringstream out;
    CHECK_THROWS_AS(write_measurement_csv(out, {"a,b"}, Eigen::MatrixXd::Zero(1, 1)), InputError);
    CHECK_THROWS_AS(write_measurement_csv(out, {"a", "b"}, Eigen::MatrixXd::Zero(1, 3)),
                    InputError);
    CHECK_THROWS_AS(read_measurement_csv("/nonexistent/anthrofit.csv"), InputError);
}

TEST_CASE("evaluation aggregates match hand arithmetic") {
    std::vector<std::string> names{"d0", "d1", "d2"};
    std::vector<std::string> groups{"arm", "arm", ""};
    Eigen::MatrixXd targets(2, 3);
    targets << 10, 20, 30, 40, 50, 60;

    EvaluationReport exact = evaluate_errors(names, groups, targets, targets);
    CHECK(exact.errors.cwiseAbs().maxCoeff() == 0.0);
    CHECK(exact.overall_average == 0.0);
    REQUIRE(exact.group_errors.count("arm") == 1);
    CHECK(exact.group_errors.at("arm").cwiseAbs().maxCoeff() == 0.0);
    CHECK(exact.group_errors.count("") == 0);

    Eigen::MatrixXd measured = targets;
    measured(0, 1) += 2.0;
    EvaluationReport one = evaluate_errors(names, groups, measured, targets);
    CHECK(one.errors(0, 1) == 2.0);
    CHECK(one.average[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(one.maximum[1] == 2.0);
    CHECK(one.average[0] == 0.0);
    CHECK(one.average[2] == 0.0);
    CHECK(one.overall_average == doctest::Approx(2.0 / 6.0).epsilon(1e-12));
    CHECK(one.group_errors.at("arm")[0] == 2.0);
    CHECK(one.group_errors.at("arm")[1] == 0.0);

    Eigen::MatrixXd pred(3, 2), truth(3, 2);
    pred << 1, 2, 3, 4, 5, 6;
    truth << 2, 2, 1, 7, 5, 0;
    EvaluationReport hand = evaluate_errors({"a", "b"}, {"", ""}, pred, truth);
    CHECK(hand.average[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hand.average[1] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(hand.maximum[0] == 2.0);
    CHECK(hand.maximum[1] == 6.0);
    CHECK(hand.overall_average == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("evaluation rejects malformed input") {
    std::vector<std::string> names{"a", "b"};
    Eigen::MatrixXd two = Eigen::MatrixXd::Ones(2, 2);
    CHECK_THROWS_AS(evaluate_errors(names, {"x"}, two, two), InputError);
    CHECK_THROWS_AS(evaluate_errors(names, {"", ""}, Eigen::MatrixXd::Ones(2, 3), two),
                    InputError);
    CHECK_THROWS_AS(evaluate_errors(names, {"", ""}, two, Eigen::MatrixXd::Ones(3, 2)),
                    InputError);
    CHECK_THROWS_AS(evaluate_errors(names, {"", ""}, Eigen::MatrixXd::Ones(0, 2),
                                    Eigen::MatrixXd::Ones(0, 2)),
                    InputError);
    Eigen::MatrixXd bad = two;
    bad(1, 1) = std::nan("");
    CHECK_THROWS_AS(evaluate_errors(names, {"", ""}, bad, two), NumericalError);
}

TEST_CASE("report json mirrors the report") {
    Eigen::MatrixXd measured(2, 2), targets(2, 2);
    measured << 11, 22, 31, 44;
    targets << 10, 20, 30, 40;
    EvaluationReport report =
        evaluate_errors({"w", "h"}, {"size", "size"}, measured, targets);
    nlohmann::ordered_json doc = report_to_json(report);

    CHECK(doc["dimensions"] == std::vector<std::string>{"w", "h"});
    for (int j = 0; j < 2; ++j) {
        CHECK(doc["average"][j].get<double>() == report.average[j]);
        CHECK(doc["maximum"][j].get<double>() == report.maximum[j]);
    }
    CHECK(doc["overall_average"].get<double>() == report.overall_average);
    CHECK(doc["errors"][0][0].get<double>() == 1.0);
    CHECK(doc["errors"][1][1].get<double>() == 4.0);
    REQUIRE(doc["groups"].contains("size"));
    CHECK(doc["groups"]["size"]["per_subject"][0].get<double>() == 3.0);
    CHECK(doc["groups"]["size"]["per_subject"][1].get<double>() == 5.0);
    CHECK(doc["groups"]["size"]["average"].get<double>() == 4.0);
    CHECK(doc["groups"]["size"]["maximum"].get<double>() == 5.0);

    double recomputed = report.errors.mean();
    CHECK(doc["overall_average"].get<double>() == recomputed);
}

TEST_CASE("tables render every dimension") {
    Eigen::MatrixXd measured(1, 2), targets(1, 2);
    measured << 12, 19;
    targets << 10, 20;
    EvaluationReport a = evaluate_errors({"w", "h"}, {"", ""}, measured, targets);
    std::string table = report_table(a, "predicted");
    CHECK(table.find("dimension (predicted)") != std::string::npos);
    CHECK(table.find("w") != std::string::npos);
    CHECK(table.find("overall average") != std::string::npos);

    std::string side = comparison_table(a, a, "baseline", "refined");
    CHECK(side.find("baseline avg") != std::string::npos);
    CHECK(side.find("refined max") != std::string::npos);

    EvaluationReport other = evaluate_errors({"x", "h"}, {"", ""}, measured, targets);
    CHECK_THROWS_AS(comparison_table(a, other, "a", "b"), InputError);
}
