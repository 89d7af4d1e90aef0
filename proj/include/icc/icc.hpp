#ifndef ICC_ICC_HPP
#define ICC_ICC_HPP

// Core inference library (no JSON or HTTP dependencies).
#include "icc/core_stats.hpp"
#include "icc/difference.hpp"
#include "icc/error.hpp"
#include "icc/ingest.hpp"
#include "icc/power.hpp"
#include "icc/resample.hpp"
#include "icc/single.hpp"
#include "icc/audit.hpp"

#endif // ICC_ICC_HPP
