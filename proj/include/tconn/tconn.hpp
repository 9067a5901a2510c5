#pragma once

#include "tconn/connection.hpp"
#include "tconn/errors.hpp"
#include "tconn/field.hpp"
#include "tconn/i2_forms.hpp"
#include "tconn/json_io.hpp"
#include "tconn/n2_forms.hpp"
#include "tconn/odekit.hpp"
#include "tconn/reduce.hpp"
#include "tconn/series.hpp"
