#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dimest/dde.hpp"
#include "dimest/parallel.hpp"

namespace dimest {

// Minkowski (box-counting) dimension estimation of point clouds and
// delay-embedded trajectory segments.

enum class CloudMetric { sup, euclidean };

struct PointCloud {
    int dim = 0;
    CloudMetric metric = CloudMetric::sup;
    std::vector<std::vector<double>> points;
    std::vector<double> bbox_min, bbox_max;

    static PointCloud from_points(std::vector<std::vector<double>> pts,
                                  CloudMetric metric = CloudMetric::sup);
};

// Number of occupied half-open grid boxes of side eps anchored at the
// bounding-box corner (plus an optional anchor shift): an upper surrogate
// for the minimal cover count within the standard constant factor.
std::int64_t covering_number(const PointCloud& cloud, double eps,
                             double anchor_shift = 0.0, Exec exec = Exec::parallel);

struct DimensionFit {
    double estimate = 0.0;
    double r_squared = 1.0;
    bool reliable = true;  // >= 5 scales and R^2 >= 0.98
    std::vector<double> epsilons;
    std::vector<std::int64_t> counts;
};

// Least-squares slope of ln K against -ln eps over the dyadic scale ladder
// eps_max, eps_max/2, ... down to eps_min.
DimensionFit minkowski_dim(const PointCloud& cloud, double eps_min, double eps_max,
                           Exec exec = Exec::parallel);

// Delay embedding: each sample time t maps to the D values of the trajectory
// at equispaced offsets in [t - window, t] (components concatenated when the
// trajectory is vector-valued).
PointCloud embed_trajectory(const Trajectory& traj, double window, int embed_dim,
                            double stride);

// CSV import/export: one point per row, comma-separated coordinates.
std::string cloud_to_csv(const PointCloud& cloud);
PointCloud cloud_from_csv(const std::string& csv, CloudMetric metric = CloudMetric::sup);

} // namespace dimest
