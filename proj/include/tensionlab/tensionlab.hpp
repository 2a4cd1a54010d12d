#ifndef TENSIONLAB_TENSIONLAB_HPP
#define TENSIONLAB_TENSIONLAB_HPP

// Umbrella include.

#include "audit.hpp"
#include "beltrami.hpp"
#include "calculus.hpp"
#include "closed_forms.hpp"
#include "grid.hpp"
#include "io.hpp"
#include "metric.hpp"
#include "qc_analysis.hpp"
#include "teichmuller.hpp"
#include "tension.hpp"

#endif
