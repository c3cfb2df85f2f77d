#pragma once
// Umbrella header for the metric-graph spectral statistics library.

namespace qgraph {
inline constexpr const char* kVersion = "1.0.0";
}

#include <qgraph/evolution.hpp>
#include <qgraph/metric_graph.hpp>
#include <qgraph/orbit_count.hpp>
#include <qgraph/orbit_theory.hpp>
#include <qgraph/parallel.hpp>
#include <qgraph/spectral_stats.hpp>
#include <qgraph/spectrum_solver.hpp>
#include <qgraph/vertex_scattering.hpp>
