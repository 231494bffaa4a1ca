#include "klconc/tables.hpp"

#include <cmath>
#include <limits>
#include <mutex>

namespace klconc::tables {

namespace {

// Grow-only cache guarded by a mutex; readers keep a shared_ptr snapshot so
// concurrent growth never invalidates spans handed out earlier.
class GrowingTable {
  public:
    using Fill = double (*)(std::size_t);

    explicit GrowingTable(Fill fill) : fill_(fill) {}

    std::shared_ptr<const std::vector<double>> at_least(std::size_t min_size) {
        std::lock_guard<std::mutex> lock(mutex_);
        if (!current_ || current_->size() < min_size) {
            std::size_t new_size = current_ ? current_->size() : 1024;
            while (new_size < min_size) new_size *= 2;
            auto grown = std::make_shared<std::vector<double>>();
            grown->reserve(new_size);
            if (current_) grown->assign(current_->begin(), current_->end());
            for (std::size_t i = grown->size(); i < new_size; ++i) {
                grown->push_back(fill_(i));
            }
            current_ = std::move(grown);
        }
        return current_;
    }

  private:
    Fill fill_;
    std::mutex mutex_;
    std::shared_ptr<const std::vector<double>> current_;
};

double log_entry(std::size_t i) {
    if (i == 0) return -std::numeric_limits<double>::infinity();
    return std::log(static_cast<double>(i));
}

double log_factorial_entry(std::size_t i) {
    return std::lgamma(static_cast<double>(i) + 1.0);
}

}  // namespace

std::shared_ptr<const std::vector<double>> log_table(std::size_t min_size) {
    static GrowingTable table(&log_entry);
    return table.at_least(min_size);
}

std::shared_ptr<const std::vector<double>> log_factorial_table(std::size_t min_size) {
    static GrowingTable table(&log_factorial_entry);
    return table.at_least(min_size);
}

}  // namespace klconc::tables
