#ifndef NATSAMP_NATSAMP_HPP
#define NATSAMP_NATSAMP_HPP

#include "signal.hpp"
#include "kernel.hpp"
#include "natural_sample.hpp"
#include "stirling.hpp"
#include "converter.hpp"
#include "pwm.hpp"
#include "spectral.hpp"
#include "oracle.hpp"
#include "io.hpp"
#include "experiment.hpp"

#endif  // NATSAMP_NATSAMP_HPP
