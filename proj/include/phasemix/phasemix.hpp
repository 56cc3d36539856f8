#ifndef PHASEMIX_PHASEMIX_HPP
#define PHASEMIX_PHASEMIX_HPP

#include "phasemix/matrix.hpp"
#include "phasemix/linsolve.hpp"
#include "phasemix/expm.hpp"
#include "phasemix/spectrum.hpp"
#include "phasemix/model.hpp"
#include "phasemix/inference.hpp"
#include "phasemix/distributions.hpp"
#include "phasemix/structured.hpp"
#include "phasemix/simulate.hpp"
#include "phasemix/model_io.hpp"
#include "phasemix/examples.hpp"

#endif
