#ifndef MIRAGE_MIRAGE_HPP
#define MIRAGE_MIRAGE_HPP

#include "mirage/alignment.hpp"
#include "mirage/depth_map.hpp"
#include "mirage/error.hpp"
#include "mirage/fixtures.hpp"
#include "mirage/geometry.hpp"
#include "mirage/loss.hpp"
#include "mirage/manifest.hpp"
#include "mirage/metrics.hpp"
#include "mirage/ordinal.hpp"
#include "mirage/pfm.hpp"
#include "mirage/png16.hpp"
#include "mirage/report.hpp"
#include "mirage/results.hpp"
#include "mirage/rng.hpp"
#include "mirage/stats.hpp"

#endif
