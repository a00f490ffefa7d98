#pragma once

#include "magscatter/amplitude.hpp"
#include "magscatter/circulation.hpp"
#include "magscatter/error.hpp"
#include "magscatter/fields.hpp"
#include "magscatter/gauge.hpp"
#include "magscatter/numerics.hpp"
#include "magscatter/section.hpp"
#include "magscatter/solenoid.hpp"
#include "magscatter/vec.hpp"
#include "magscatter/verify.hpp"
