#pragma once

#include "analysis.hpp"
#include "area.hpp"
#include "calibration.hpp"
#include "error.hpp"
#include "fifo_builders.hpp"
#include "kernel.hpp"
#include "netlist.hpp"
#include "netlist_io.hpp"
#include "rng.hpp"
#include "time.hpp"
#include "timing_model.hpp"
#include "trace_io.hpp"
#include "window.hpp"
