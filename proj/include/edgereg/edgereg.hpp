#pragma once

#include "core.hpp"
#include "error.hpp"
#include "extract.hpp"
#include "functional.hpp"
#include "graph.hpp"
#include "io.hpp"
#include "packing.hpp"
#include "rational.hpp"
#include "regularity.hpp"
#include "removal.hpp"
#include "rng.hpp"
