#include "fedmr/spectrum.hpp"

#include "fedmr/constants.hpp"

namespace fedmr::spectrum {

std::vector<Line> nv_lines(double b_axial, double fwhm) {
  const double full = phys::gamma_hz_t * b_axial;
  return {
      {phys::zfs_hz - full, 1.0 / 8.0, fwhm},
      {phys::zfs_hz + full, 1.0 / 8.0, fwhm},
      {phys::zfs_hz - full / 3.0, 3.0 / 8.0, fwhm},
      {phys::zfs_hz + full / 3.0, 3.0 / 8.0, fwhm},
  };
}

double lorentzian(double f, const Line& line) {
  const double u = 2.0 * (f - line.center) / line.fwhm;
  return line.amplitude / (1.0 + u * u);
}

double line_shape(double f, const std::vector<Line>& lines) {
  double s = 0.0;
  for (const Line& l : lines) s += lorentzian(f, l);
  return s;
}

}  // namespace fedmr::spectrum
