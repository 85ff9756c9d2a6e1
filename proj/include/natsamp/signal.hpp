#ifndef NATSAMP_SIGNAL_HPP
#define NATSAMP_SIGNAL_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace natsamp {

/// Raised when a sample violates the |x| < 1 amplitude contract.
class amplitude_error : public std::domain_error {
public:
    amplitude_error(std::size_t index, double value)
        : std::domain_error("sample " + std::to_string(index) + " has |x| >= 1 (value " +
                            std::to_string(value) + ")"),
          index_(index),
          value_(value) {}

    std::size_t index() const noexcept { return index_; }
    double value() const noexcept { return value_; }

private:
    std::size_t index_;
    double value_;
};

/// A rate-tagged finite sequence of real samples.
///
/// The rate must be positive and every sample finite. The |x| < 1 contract
/// is not enforced here because demodulated and rendered signals share the
/// type; call require_amplitude() at ingestion points.
class SampleStream {
public:
    SampleStream() = default;

    SampleStream(double rate_hz, std::vector<double> samples)
        : rate_(rate_hz), samples_(std::move(samples)) {
        if (!(rate_ > 0.0) || !std::isfinite(rate_))
            throw std::invalid_argument("sample rate must be positive and finite");
        for (std::size_t i = 0; i < samples_.size(); ++i)
            if (!std::isfinite(samples_[i]))
                throw std::invalid_argument("sample " + std::to_string(i) + " is not finite");
    }

    double rate() const noexcept { return rate_; }
    double period() const noexcept { return 1.0 / rate_; }
    std::size_t size() const noexcept { return samples_.size(); }
    bool empty() const noexcept { return samples_.empty(); }

    const std::vector<double>& samples() const noexcept { return samples_; }
    double operator[](std::size_t i) const { return samples_[i]; }

    /// Throws amplitude_error naming the first offending index.
    void require_amplitude() const {
        for (std::size_t i = 0; i < samples_.size(); ++i)
            if (!(std::abs(samples_[i]) < 1.0)) throw amplitude_error(i, samples_[i]);
    }

private:
    double rate_ = 1.0;
    std::vector<double> samples_;
};

}  // namespace natsamp

#endif  // NATSAMP_SIGNAL_HPP
