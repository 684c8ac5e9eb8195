#pragma once

// Umbrella header for the sicspin toolkit: spin-1 divacancy simulation,
// closed-form signal models, temperature models and thermometry, the
// Levenberg-Marquardt fit engine, and the CLI pipeline plumbing.

#include "sicspin/constants.hpp"
#include "sicspin/errors.hpp"
#include "sicspin/spin_model.hpp"
#include "sicspin/temperature_models.hpp"
#include "sicspin/signal_models.hpp"
#include "sicspin/dynamics.hpp"
#include "sicspin/trace.hpp"
#include "sicspin/fitting.hpp"
#include "sicspin/fit_models.hpp"
#include "sicspin/trace_io.hpp"
#include "sicspin/config.hpp"
#include "sicspin/svg_plot.hpp"
#include "sicspin/pipeline.hpp"
