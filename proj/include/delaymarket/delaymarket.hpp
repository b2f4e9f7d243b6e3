#pragma once

#include "delaymarket/availability.hpp"
#include "delaymarket/errors.hpp"
#include "delaymarket/model.hpp"
#include "delaymarket/pareto.hpp"
#include "delaymarket/riccati.hpp"
#include "delaymarket/simulator.hpp"
#include "delaymarket/stability.hpp"
#include "delaymarket/switching.hpp"
