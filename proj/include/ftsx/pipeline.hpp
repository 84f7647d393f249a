#pragma once

#include "ftsx/fpca.hpp"
#include "ftsx/wavelet.hpp"

namespace ftsx {

/// Full global + local feature extraction on one series.
struct Extraction {
  GlobalFeatures global;
  FunctionalSeries global_fit;  // mean + retained components
  FunctionalSeries residual;
  WaveletBasis basis;
  NrsiMap map;
  LocalMatrix local;

  /// global_fit + local curves.
  FunctionalSeries combined() const;
};

Extraction extract_features(const FunctionalSeries& series, Mode mode, int j0 = 3);

}  // namespace ftsx
