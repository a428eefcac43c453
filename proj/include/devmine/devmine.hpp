#pragma once

// Deviance mining toolkit: mine pattern features from labeled event logs,
// select them by Fisher score, train explainable classifiers, and measure
// both predictive accuracy and ruleset interestingness.

#include "devmine/classifier.hpp"
#include "devmine/config.hpp"
#include "devmine/errors.hpp"
#include "devmine/evaluation.hpp"
#include "devmine/io.hpp"
#include "devmine/log.hpp"
#include "devmine/mining.hpp"
#include "devmine/pattern.hpp"
#include "devmine/random.hpp"
#include "devmine/rules.hpp"
#include "devmine/selection.hpp"
#include "devmine/synth.hpp"
