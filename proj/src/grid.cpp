#include <cmath>
#include <sstream>

#include "dtwin/errors.hpp"
#include "dtwin/fom.hpp"

namespace dtwin::fom {

Grid1D::Grid1D(std::vector<double> faces) : faces_(std::move(faces)) {
  if (faces_.size() < 4) throw DomainError("grid needs at least 3 cells");
  if (faces_.front() != 0.0) throw DomainError("first grid face must sit at y = 0");
  for (std::size_t i = 1; i < faces_.size(); ++i)
    if (!(faces_[i] > faces_[i - 1])) throw DomainError("grid faces must be strictly increasing");
  const std::size_t n = faces_.size() - 1;
  centers_.resize(n);
  widths_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    centers_[i] = 0.5 * (faces_[i] + faces_[i + 1]);
    widths_[i] = faces_[i + 1] - faces_[i];
  }
}

Grid1D Grid1D::uniform(double length, std::size_t n_cells) {
  return graded(length, n_cells, 1.0);
}

Grid1D Grid1D::graded(double length, std::size_t n_cells, double ratio) {
  if (!(length > 0.0)) throw DomainError("grid length must be > 0");
  if (n_cells < 3) throw DomainError("grid needs at least 3 cells");
  if (!(ratio > 0.0)) throw DomainError("grid grading ratio must be > 0");
  std::vector<double> faces(n_cells + 1, 0.0);
  if (ratio == 1.0) {
    for (std::size_t i = 0; i <= n_cells; ++i)
      faces[i] = length * static_cast<double>(i) / static_cast<double>(n_cells);
  } else {
    const double first = length * (ratio - 1.0) / (std::pow(ratio, static_cast<double>(n_cells)) - 1.0);
    double w = first;
    for (std::size_t i = 1; i <= n_cells; ++i) {
      faces[i] = faces[i - 1] + w;
      w *= ratio;
    }
  }
  faces.back() = length;
  return Grid1D(std::move(faces));
}

}  // namespace dtwin::fom
