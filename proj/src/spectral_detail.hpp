#pragma once

#include "zoomout/spectral.hpp"

namespace zoomout::detail {

void normalize_signs(Eigen::MatrixXd& phi);

SpectralBasis krylov_spectral_basis(const LaplacianPair& lap, int k, const EigenOptions& opts);

}  // namespace zoomout::detail
