#pragma once

#include "medsamp/errors.hpp"
#include "medsamp/fraction.hpp"
#include "medsamp/probability.hpp"
#include "medsamp/distribution.hpp"
#include "medsamp/random.hpp"
#include "medsamp/fitness.hpp"
#include "medsamp/noise.hpp"
#include "medsamp/binomial.hpp"
#include "medsamp/estimators.hpp"
#include "medsamp/parallel.hpp"
#include "medsamp/chain.hpp"
#include "medsamp/efht.hpp"
#include "medsamp/drift.hpp"
#include "medsamp/lemmas.hpp"
#include "medsamp/simulator.hpp"
#include "medsamp/experiment.hpp"
#include "medsamp/report.hpp"
