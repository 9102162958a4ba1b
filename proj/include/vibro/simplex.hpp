#pragma once

// Derivative-free Nelder-Mead simplex descent on the unit box [0, 1]^d.
// Trial points are projected back into the box before evaluation.

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Core>

namespace vibro {

struct SimplexOptions {
    double initial_step = 0.1;  ///< edge length of the starting simplex
    double tol = 1e-6;          ///< stop once every vertex is this close to the best one
    int max_evals = 1000;
    double reflect = 1.0;
    double expand = 2.0;
    double contract = 0.5;
    double shrink = 0.5;
};

struct SimplexResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int n_evals = 0;
    bool converged = false;
};

template <typename Scalar, typename F>
SimplexResult nelder_mead_box(F&& f, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x0,
                              const SimplexOptions& opt) {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Eigen::Index d = x0.size();

    SimplexResult res;
    auto project = [](Vec v) { return Vec(v.cwiseMax(Scalar(0)).cwiseMin(Scalar(1))); };
    auto eval = [&](const Vec& v) {
        ++res.n_evals;
        return static_cast<Scalar>(f(v));
    };

    std::vector<Vec> pts;
    std::vector<Scalar> vals;
    pts.push_back(project(x0));
    vals.push_back(eval(pts[0]));
    for (Eigen::Index i = 0; i < d; ++i) {
        Vec v = pts[0];
        v[i] += opt.initial_step;
        if (v[i] > Scalar(1)) v[i] = pts[0][i] - opt.initial_step;
        v = project(v);
        pts.push_back(v);
        vals.push_back(eval(v));
    }

    std::vector<std::size_t> order(pts.size());
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        // Stable so that ties keep the earlier (older) vertex as best.
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        std::vector<Vec> p2;
        std::vector<Scalar> v2;
        for (auto i : order) {
            p2.push_back(pts[i]);
            v2.push_back(vals[i]);
        }
        pts.swap(p2);
        vals.swap(v2);
    };
    auto diameter = [&] {
        Scalar dmax = 0;
        for (std::size_t i = 1; i < pts.size(); ++i)
            dmax = std::max(dmax, (pts[i] - pts[0]).template lpNorm<Eigen::Infinity>());
        return dmax;
    };

    const std::size_t worst = static_cast<std::size_t>(d);
    while (true) {
        sort_simplex();
        if (diameter() < opt.tol) {
            res.converged = true;
            break;
        }
        // An iteration costs at most d + 2 evaluations (shrink after a failed contraction).
        if (res.n_evals + static_cast<int>(d) + 2 > opt.max_evals) break;

        Vec centroid = Vec::Zero(d);
        for (std::size_t i = 0; i < worst; ++i) centroid += pts[i];
        centroid /= static_cast<Scalar>(d);

        const Vec xr = project(centroid + opt.reflect * (centroid - pts[worst]));
        const Scalar fr = eval(xr);
        if (fr < vals[0]) {
            const Vec xe = project(centroid + opt.expand * (xr - centroid));
            const Scalar fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[worst - 1]) {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        const Vec xc = outside ? Vec(centroid + opt.contract * (xr - centroid))
                               : Vec(centroid + opt.contract * (pts[worst] - centroid));
        const Scalar fc = eval(xc);
        if (fc < (outside ? fr : vals[worst])) {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t i = 1; i < pts.size(); ++i) {
            pts[i] = pts[0] + opt.shrink * (pts[i] - pts[0]);
            vals[i] = eval(pts[i]);
        }
    }

    res.x = pts[0].template cast<double>();
    res.value = static_cast<double>(vals[0]);
    return res;
}

}  // namespace vibro
