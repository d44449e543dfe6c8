#include "dimest/boxdim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace dimest {

PointCloud PointCloud::from_points(std::vector<std::vector<double>> pts,
                                   CloudMetric metric) {
    if (pts.empty()) throw std::invalid_argument("point cloud must be nonempty");
    PointCloud c;
    c.dim = int(pts.front().size());
    if (c.dim <= 0) throw std::invalid_argument("points need at least one coordinate");
    c.metric = metric;
    for (const auto& p : pts) {
        if (int(p.size()) != c.dim) throw std::invalid_argument("ragged point list");
        for (double x : p)
            if (!std::isfinite(x)) throw std::invalid_argument("non-finite coordinate");
    }
    c.bbox_min.assign(c.dim, std::numeric_limits<double>::infinity());
    c.bbox_max.assign(c.dim, -std::numeric_limits<double>::infinity());
    for (const auto& p : pts)
        for (int j = 0; j < c.dim; ++j) {
            c.bbox_min[j] = std::min(c.bbox_min[j], p[j]);
            c.bbox_max[j] = std::max(c.bbox_max[j], p[j]);
        }
    c.points = std::move(pts);
    return c;
}

namespace {

struct IndexKey {
    std::vector<std::int32_t> idx;
    bool operator==(const IndexKey& o) const { return idx == o.idx; }
};

struct IndexKeyHash {
    std::size_t operator()(const IndexKey& k) const {
        std::size_t h = 1469598103934665603ull;
        for (std::int32_t v : k.idx) {
            h ^= std::size_t(std::uint32_t(v));
            h *= 1099511628211ull;
        }
        return h;
    }
};

} // namespace

std::int64_t covering_number(const PointCloud& cloud, double eps, double anchor_shift,
                             Exec exec) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    const int D = cloud.dim;
    auto key_of = [&](const std::vector<double>& p) {
        IndexKey k;
        k.idx.resize(D);
        for (int j = 0; j < D; ++j)
            k.idx[j] =
                std::int32_t(std::floor((p[j] - cloud.bbox_min[j] - anchor_shift) / eps));
        return k;
    };
    const std::int64_t n = std::int64_t(cloud.points.size());
    int shards = (exec == Exec::parallel) ? std::min(par::max_threads(), 16) : 1;
    if (shards <= 1 || n < 1024) {
        std::unordered_set<IndexKey, IndexKeyHash> boxes;
        boxes.reserve(std::size_t(n));
        for (const auto& p : cloud.points) boxes.insert(key_of(p));
        return std::int64_t(boxes.size());
    }
    std::vector<std::unordered_set<IndexKey, IndexKeyHash>> partial(shards);
    par::for_each_index(exec, shards, [&](std::int64_t s) {
        std::int64_t lo = n * s / shards, hi = n * (s + 1) / shards;
        auto& set = partial[s];
        set.reserve(std::size_t(hi - lo));
        for (std::int64_t i = lo; i < hi; ++i) set.insert(key_of(cloud.points[std::size_t(i)]));
    });
    std::unordered_set<IndexKey, IndexKeyHash> all;
    for (auto& s : partial)
        for (const auto& k : s) all.insert(k);
    return std::int64_t(all.size());
}

DimensionFit minkowski_dim(const PointCloud& cloud, double eps_min, double eps_max,
                           Exec exec) {
    if (!(eps_min > 0.0 && eps_min < eps_max))
        throw std::invalid_argument("need 0 < eps_min < eps_max");
    DimensionFit fit;
    for (double eps = eps_max; eps >= eps_min * (1.0 - 1e-12); eps *= 0.5)
        fit.epsilons.push_back(eps);
    if (fit.epsilons.size() < 3)
        throw std::invalid_argument("fewer than 3 usable scales between eps_min and eps_max");
    fit.counts.resize(fit.epsilons.size());
    for (std::size_t i = 0; i < fit.epsilons.size(); ++i)
        fit.counts[i] = covering_number(cloud, fit.epsilons[i], 0.0, exec);

    // least squares of ln K against -ln eps
    const std::size_t n = fit.epsilons.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double x = -std::log(fit.epsilons[i]);
        double y = std::log(double(fit.counts[i]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    double den = double(n) * sxx - sx * sx;
    fit.estimate = den != 0.0 ? (double(n) * sxy - sx * sy) / den : 0.0;
    double sst = syy - sy * sy / double(n);
    if (sst <= 1e-12) {
        fit.r_squared = 1.0;  // constant counts: a flat (dimension 0) fit
    } else {
        double b = (sy - fit.estimate * sx) / double(n);
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double x = -std::log(fit.epsilons[i]);
            double y = std::log(double(fit.counts[i]));
            double r = y - (fit.estimate * x + b);
            sse += r * r;
        }
        fit.r_squared = 1.0 - sse / sst;
    }
    fit.reliable = n >= 5 && fit.r_squared >= 0.98;
    return fit;
}

PointCloud embed_trajectory(const Trajectory& traj, double window, int embed_dim,
                            double stride) {
    if (!(window > 0.0)) throw std::invalid_argument("window must be positive");
    if (embed_dim < 1) throw std::invalid_argument("embedding dimension must be >= 1");
    if (!(stride > 0.0)) throw std::invalid_argument("stride must be positive");
    double t_lo = traj.start_time() + window;
    double t_hi = traj.end_time();
    if (!(t_hi > t_lo + stride))
        throw std::invalid_argument("trajectory must cover window + sampling span");
    const int d = traj.dim();
    std::vector<std::vector<double>> pts;
    for (double t = t_lo; t <= t_hi + 1e-12; t += stride) {
        double tt = std::min(t, t_hi);
        std::vector<double> row;
        row.reserve(std::size_t(embed_dim) * d);
        for (int j = 0; j < embed_dim; ++j) {
            double off = embed_dim == 1 ? tt
                                        : tt - window +
                                              window * double(j) / double(embed_dim - 1);
            Vec v = traj.eval(off);
            for (double x : v) row.push_back(x);
        }
        pts.push_back(std::move(row));
    }
    return PointCloud::from_points(std::move(pts), CloudMetric::sup);
}

std::string cloud_to_csv(const PointCloud& cloud) {
    std::string out;
    char buf[40];
    for (const auto& p : cloud.points) {
        for (int j = 0; j < cloud.dim; ++j) {
            auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), p[j]);
            (void)ec;
            out.append(buf, end);
            out.push_back(j + 1 == cloud.dim ? '\n' : ',');
        }
    }
    return out;
}

PointCloud cloud_from_csv(const std::string& csv, CloudMetric metric) {
    std::vector<std::vector<double>> pts;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            std::string tok = line.substr(pos, comma == std::string::npos ? std::string::npos
                                                                          : comma - pos);
            if (!tok.empty()) row.push_back(std::stod(tok));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (!row.empty()) pts.push_back(std::move(row));
    }
    return PointCloud::from_points(std::move(pts), metric);
}

} // namespace dimest
