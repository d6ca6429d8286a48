#pragma once

#include "msd/core/tape.hpp"

// Loss building blocks shared by the sequential models. Conventions:
// reconstruction is the mean squared error over every element; the Gaussian
// KL is summed over steps and latent dimensions and averaged over the batch.

namespace msd::models {

inline core::Tape::Var reconstruction_mse(core::Tape& tape, core::Tape::Var pred, core::Tape::Var target) {
    return tape.mse(pred, target);
}

// KL(N(mu, exp(logvar)) || N(0, I)) = 0.5 sum(mu^2 + exp(logvar) - 1 - logvar),
// summed over rows (= batch * steps) and dims, divided by the batch size.
inline core::Tape::Var gaussian_kl(core::Tape& tape, core::Tape::Var mu, core::Tape::Var logvar, int batch_n) {
    auto ones = tape.input(core::Tensor::full(tape.value(mu).shape(), 1.0f));
    auto elem = tape.sub(tape.sub(tape.add(tape.square(mu), tape.exp_op(logvar)), ones), logvar);
    return tape.scale(tape.sum(elem), 0.5f / static_cast<float>(batch_n));
}

inline core::Tape::Var vae_loss(core::Tape& tape, core::Tape::Var recon_mse, core::Tape::Var kl) {
    return tape.add(recon_mse, kl);
}

inline core::Tape::Var beta_vae_loss(core::Tape& tape, core::Tape::Var recon_mse, core::Tape::Var kl,
                                     float beta) {
    return tape.add(recon_mse, tape.scale(kl, beta));
}

// Mean absolute latent activation.
inline core::Tape::Var sparsity_penalty(core::Tape& tape, core::Tape::Var z) {
    return tape.mean(tape.abs_op(z));
}

inline core::Tape::Var sparse_ae_loss(core::Tape& tape, core::Tape::Var recon_mse, core::Tape::Var z,
                                      float weight) {
    return tape.add(recon_mse, tape.scale(sparsity_penalty(tape, z), weight));
}

} // namespace msd::models
