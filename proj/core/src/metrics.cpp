#include "resistograph/metrics.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "resistograph/error.hpp"

namespace resistograph {

double r_squared_linear_fit(const ResistanceSurface& resistances,
                            const DissimilarityMatrix& target, FstTransform transform) {
  const Eigen::Index s = resistances.size();
  if (target.size() != s) throw DataError("resistance surface and F have different sizes");
  std::vector<double> xs, ys;
  for (Eigen::Index a = 0; a < s; ++a) {
    for (Eigen::Index b = a + 1; b < s; ++b) {
      double y = target.values(a, b);
      if (transform == FstTransform::odds) {
        if (!(y < 1.0)) throw DataError("odds transform undefined for F = 1");
        y = y / (1.0 - y);
      }
      xs.push_back(resistances(a, b));
      ys.push_back(y);
    }
  }
  const auto count = static_cast<double>(xs.size());
  if (xs.size() < 2) throw DataError("R^2 needs at least 2 pairs");

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (syy == 0.0) throw DataError("R^2 undefined: dissimilarities have zero variance");
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (intercept + slope * xs[i]);
    ss_res += e * e;
  }
  return 1.0 - ss_res / syy;
}

std::vector<ParameterRow> parameter_table(const Eigen::VectorXd& theta, const ModelSpec& spec,
                                          const Eigen::VectorXd& presence,
                                          const std::vector<std::string>& landcover_names,
                                          double presence_threshold) {
  const std::vector<std::string> names = parameter_names(spec, landcover_names);
  if (static_cast<std::size_t>(theta.size()) != names.size()) {
    throw DataError("parameter vector does not match model");
  }
  const Eigen::Index alpha_at = spec.uses_elevation() ? 3 : 0;
  std::vector<ParameterRow> rows;
  for (Eigen::Index h = 0; h < theta.size(); ++h) {
    if (spec.uses_landcover() && h >= alpha_at) {
      const Eigen::Index t = h - alpha_at;
      if (t < presence.size() && presence[t] < presence_threshold) continue;
    }
    rows.push_back({names[static_cast<std::size_t>(h)], theta[h], std::lround(theta[h])});
  }
  return rows;
}

std::string format_parameter_table(const std::vector<ParameterRow>& rows) {
  std::size_t width = 9;
  for (const ParameterRow& r : rows) width = std::max(width, r.name.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "parameter" << "  " << std::right
      << std::setw(10) << "value" << '\n';
  for (const ParameterRow& r : rows) {
    out << std::left << std::setw(static_cast<int>(width)) << r.name << "  " << std::right
        << std::setw(10) << r.rounded << '\n';
  }
  return out.str();
}

void write_parameter_csv(const std::vector<ParameterRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  out << "parameter,value,rounded\n";
  for (const ParameterRow& r : rows) out << r.name << ',' << r.value << ',' << r.rounded << '\n';
}

void write_scatter_csv(const ResistanceSurface& resistances, const DissimilarityMatrix& target,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  out << "l,k,resistance,dissimilarity\n";
  for (Eigen::Index a = 0; a < resistances.size(); ++a) {
    for (Eigen::Index b = a + 1; b < resistances.size(); ++b) {
      out << a << ',' << b << ',' << resistances(a, b) << ',' << target.values(a, b) << '\n';
    }
  }
}

}  // namespace resistograph
