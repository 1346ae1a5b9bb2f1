#include "eoqt/propagators/channel.hpp"

namespace eoqt {

PreparedChannel::PreparedChannel(JumpChannel ch, double step) : channel(std::move(ch)), dt(step) {
    if (channel.op.rows() != channel.op.cols() || channel.op.rows() < 2)
        throw std::invalid_argument("jump operator must be square with dimension >= 2");
    if (!(channel.rate >= 0.0)) throw std::invalid_argument("channel rate must be non-negative");
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    cdc = channel.op.adjoint() * channel.op;
    no_jump = hermitian_exp(cdc, -0.5 * channel.rate * dt);
}

}  // namespace eoqt
