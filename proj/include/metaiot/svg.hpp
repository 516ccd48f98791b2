#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace metaiot::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

std::string line_plot(const std::vector<Series>& series, const std::string& title, const std::string& x_label,
                      const std::string& y_label);

// values(row, col) drawn with row 0 at the bottom; colour scale spans [lo, hi].
std::string heatmap(const Eigen::MatrixXd& values, double lo, double hi, const std::string& title);

} // namespace metaiot::svg
