#pragma once

// CSV writers for experiment outputs. Header lines are a fixed contract with
// the plotting tools.

#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "polglrt/errors.hpp"
#include "polglrt/forward_model.hpp"
#include "polglrt/mc_harness.hpp"

namespace polglrt::csv {

inline constexpr const char* kPdHeader = "mode,snr_db,pd,ci_lo,ci_hi";
inline constexpr const char* kDphiHeader = "mode,snr_db,dphi_rad";
inline constexpr const char* kImageHeader = "ix,iy,x_m,y_m,lambda";
inline constexpr const char* kThresholdHeader = "mode,snr_db,threshold";
inline constexpr const char* kHoldoutHeader = "mode,snr_db,fa_rate,se,within_3se";
inline constexpr const char* kAnnotationHeader = "target,ix,iy,x_m,y_m,e_true_x,e_true_y,e_true_z,e_est_x,e_est_y,e_est_z,dphi_rad,lambda";
inline constexpr const char* kSignalHeader = "path,receiver,polarization,omega_index,re,im";

// Round-trip precision so reruns compare byte-for-byte.
inline void precise(std::ostream& os) { os << std::setprecision(std::numeric_limits<double>::max_digits10); }

inline void write_pd(std::ostream& os, const std::vector<PdRow>& rows) {
  precise(os);
  os << kPdHeader << "\n";
  for (const auto& r : rows)
    os << to_string(r.mode) << "," << r.snr_db << "," << r.estimate.pd << "," << r.estimate.ci.lo << ","
       << r.estimate.ci.hi << "\n";
}

inline void write_thresholds(std::ostream& os, const std::vector<ThresholdRow>& rows) {
  precise(os);
  os << kThresholdHeader << "\n";
  for (const auto& r : rows) os << to_string(r.mode) << "," << r.snr_db << "," << r.threshold << "\n";
}

inline void write_holdout(std::ostream& os, const std::vector<HoldoutRow>& rows) {
  precise(os);
  os << kHoldoutHeader << "\n";
  for (const auto& r : rows)
    os << to_string(r.mode) << "," << r.snr_db << "," << r.check.rate << "," << r.check.standard_error << ","
       << (r.check.within_3se ? 1 : 0) << "\n";
}

inline void write_dphi(std::ostream& os, const std::vector<DphiRow>& rows) {
  precise(os);
  os << kDphiHeader << "\n";
  for (const auto& r : rows) os << to_string(r.mode) << "," << r.snr_db << "," << r.mean_dphi << "\n";
}

inline void write_image(std::ostream& os, const StatImage& img) {
  precise(os);
  os << kImageHeader << "\n";
  for (std::size_t iy = 0; iy < img.grid.ny; ++iy)
    for (std::size_t ix = 0; ix < img.grid.nx; ++ix)
      os << ix << "," << iy << "," << img.grid.x(ix) << "," << img.grid.y(iy) << "," << img.value(ix, iy) << "\n";
}

inline void write_annotations(std::ostream& os, const StatImage& img) {
  precise(os);
  os << kAnnotationHeader << "\n";
  for (const auto& a : img.targets)
    os << a.target << "," << a.ix << "," << a.iy << "," << a.x_m << "," << a.y_m << "," << a.e_true.x() << ","
       << a.e_true.y() << "," << a.e_true.z() << "," << a.e_est.x() << "," << a.e_est.y() << "," << a.e_est.z() << ","
       << a.dphi << "," << a.lambda << "\n";
}

inline void write_signals(std::ostream& os, const SignalSet& s) {
  precise(os);
  os << kSignalHeader << "\n";
  auto block = [&](const char* path, const Eigen::MatrixXcd& m) {
    for (Eigen::Index c = 0; c < m.rows(); ++c) {
      const auto& ch = s.channels[static_cast<std::size_t>(c)];
      for (Eigen::Index i = 0; i < m.cols(); ++i)
        os << path << "," << ch.receiver << "," << to_string(ch.pol) << "," << i << "," << m(c, i).real() << ","
           << m(c, i).imag() << "\n";
    }
  };
  block("TP", s.tp);
  if (s.dp) block("DP", *s.dp);
}

template <class Fn>
void write_file(const std::string& path, Fn&& fn) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  fn(out);
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace polglrt::csv
