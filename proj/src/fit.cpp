#include "chaotherm/fit.hpp"

#include <cmath>
#include <limits>

#include "chaotherm/error.hpp"

namespace chaotherm {

namespace {

struct Eval {
    double amplitude;
    double ssr;
};

Eval evaluate(const std::vector<double>& x, const std::vector<double>& y,
              const std::function<double(double, double)>& shape, double w) {
    double sgy = 0.0, sgg = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double g = shape(x[i], w);
        sgy += g * y[i];
        sgg += g * g;
    }
    double a = sgg > 0.0 ? sgy / sgg : 0.0;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - a * shape(x[i], w);
        ssr += r * r;
    }
    return {a, ssr};
}

}  // namespace

ShapeFit fit_shape(const std::vector<double>& x, const std::vector<double>& y,
                   const std::function<double(double, double)>& shape, double wmin, double wmax) {
    require(x.size() == y.size() && !x.empty(), ErrorKind::insufficient_data, "nothing to fit");
    require(wmin > 0.0 && wmax > wmin, ErrorKind::parameter, "bad width bracket");
    double syy = 0.0;
    for (double v : y) syy += v * v;
    require(syy > 0.0, ErrorKind::degenerate_input, "all-zero data");

    const int grid = 80;
    const double la = std::log(wmin), lb = std::log(wmax);
    int best = 0;
    double best_ssr = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid; ++i) {
        double w = std::exp(la + (lb - la) * i / grid);
        double ssr = evaluate(x, y, shape, w).ssr;
        if (ssr < best_ssr) {
            best_ssr = ssr;
            best = i;
        }
    }
    double a = la + (lb - la) * std::max(0, best - 1) / grid;
    double b = la + (lb - la) * std::min(grid, best + 1) / grid;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = evaluate(x, y, shape, std::exp(c)).ssr, fd = evaluate(x, y, shape, std::exp(d)).ssr;
    for (int it = 0; it < 100 && b - a > 1e-10; ++it) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - phi * (b - a);
            fc = evaluate(x, y, shape, std::exp(c)).ssr;
        } else {
            a = c; c = d; fc = fd;
            d = a + phi * (b - a);
            fd = evaluate(x, y, shape, std::exp(d)).ssr;
        }
    }
    double w = std::exp(0.5 * (a + b));
    Eval e = evaluate(x, y, shape, w);
    return {e.amplitude, w, e.ssr / syy};
}

}  // namespace chaotherm
