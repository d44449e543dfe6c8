#pragma once

#include <string>

#include <json.hpp>

#include "dimest/boxdim.hpp"
#include "dimest/dde.hpp"
#include "dimest/field.hpp"
#include "dimest/growth.hpp"
#include "dimest/linalg.hpp"

namespace dimest {

// JSON wire formats.  Ordered maps keep artifact bytes reproducible.
using Json = nlohmann::ordered_json;

Json to_json(const Valuation& v);
Valuation valuation_from_json(const Json& j);

Json to_json(const Scalar& s);
Scalar scalar_from_json(const Json& j, const Valuation& v);

Json to_json(const Mat& m);
Mat mat_from_json(const Json& j, const Valuation& v);

Json to_json(const NormedSpace& s);
NormedSpace space_from_json(const Json& j);

Json to_json(const GValue& g);

Json to_json(const CompactnessLadder& ladder);
CompactnessLadder ladder_from_json(const Json& j);

Json to_json(const GrowthCertificate& cert);
GrowthCertificate certificate_from_json(const Json& j);

Json to_json(const Piecewise& p);
Piecewise piecewise_from_json(const Json& j);

Json delay_system_to_json(const DelaySystem& sys);
DelaySystem delay_system_from_json(const Json& j);

std::string trajectory_to_csv(const Trajectory& traj, double step);

} // namespace dimest
