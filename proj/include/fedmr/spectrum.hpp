#ifndef FEDMR_SPECTRUM_HPP
#define FEDMR_SPECTRUM_HPP

#include <vector>

namespace fedmr::spectrum {

struct Line {
  double center;     // [Hz]
  double amplitude;  // relative weight, all lines of a pattern sum to 1
  double fwhm;       // [Hz]
};

// Zeeman pattern of an NV ensemble in an axial field: the aligned family
// (1/4 of the centers) splits by +-gamma*B about the zero-field splitting,
// the three inclined families (3/4) see the 1/3 axis projection.
std::vector<Line> nv_lines(double b_axial, double fwhm);

// amplitude / (1 + (2 (f - center)/fwhm)^2); equals amplitude at center,
// half of it at +-fwhm/2.
double lorentzian(double f, const Line& line);

// Sum over the pattern, in (0, 1] for nv_lines patterns.
double line_shape(double f, const std::vector<Line>& lines);

}  // namespace fedmr::spectrum

#endif
