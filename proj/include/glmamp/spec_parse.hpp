#pragma once

// Parser for the channel/prior spec strings shared by the CLI and config files:
//   awgn(var=<f>) probit(scale=<f>) poisson() logistic(scale=<f>)
//   gaussian(mean=<f>,var=<f>) bg(rho=<f>,mean=<f>,var=<f>) laplace(lambda=<f>)

#include <stdexcept>
#include <string>
#include <string_view>

#include "glmamp/channels.hpp"
#include "glmamp/priors.hpp"

namespace glmamp {

/// Carries the 0-based character offset of the problem in the input string.
class SpecParseError : public std::invalid_argument {
public:
    SpecParseError(std::string_view input, std::size_t position, const std::string& message);
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

ChannelPtr parse_channel(std::string_view text);
PriorPtr parse_prior(std::string_view text);

}  // namespace glmamp
