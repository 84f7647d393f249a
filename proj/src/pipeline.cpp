#include "ftsx/pipeline.hpp"

namespace ftsx {

FunctionalSeries Extraction::combined() const {
  return FunctionalSeries(global_fit.grid(), global_fit.values() + local.curves.values());
}

Extraction extract_features(const FunctionalSeries& series, Mode mode, int j0) {
  GlobalFeatures global = extract_global(series, mode);
  FunctionalSeries fit = reconstruct(global);
  FunctionalSeries resid(series.grid(), series.values() - fit.values());
  WaveletBasis basis = WaveletBasis::sym10(WaveletBasis::depth_for(series.points()), j0);
  NrsiMap map = build_nrsi(series.grid(), basis);
  LocalMatrix local = local_matrix(resid, map, basis);
  return {std::move(global), std::move(fit), std::move(resid), std::move(basis), std::move(map), std::move(local)};
}

}  // namespace ftsx
