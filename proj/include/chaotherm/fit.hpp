#pragma once

#include <functional>
#include <vector>

namespace chaotherm {

// y ~ a * shape(x, w): amplitude solved in closed form, width by a log-grid scan
// followed by golden-section refinement. Residual is SSR / sum(y^2).
struct ShapeFit {
    double amplitude = 0.0;
    double width = 0.0;
    double residual = 0.0;
};

ShapeFit fit_shape(const std::vector<double>& x, const std::vector<double>& y,
                   const std::function<double(double, double)>& shape, double wmin, double wmax);

}  // namespace chaotherm
