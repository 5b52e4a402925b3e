#pragma once

// Umbrella header for the dyncut library.

#include "dyncut/date.hpp"
#include "dyncut/market_data.hpp"
#include "dyncut/spectral_basis.hpp"
#include "dyncut/spectral_moments.hpp"
#include "dyncut/moments_io.hpp"
#include "dyncut/market_graph.hpp"
#include "dyncut/cut_tree.hpp"
#include "dyncut/allocation.hpp"
#include "dyncut/backtest.hpp"
#include "dyncut/backtest_io.hpp"
#include "dyncut/synthetic.hpp"
