#pragma once

#include <memory>
#include <string>
#include <vector>

#include "savi/core.hpp"

namespace savi {

struct ParseError : ConfigError {
    ParseError(size_t pos, const std::string& msg);
    size_t position;
};

// A parsed evidence pipeline. Copies are deep.
class Pipeline {
public:
    explicit Pipeline(std::unique_ptr<EvidenceStream> root);
    Pipeline(const Pipeline& o);
    Pipeline& operator=(const Pipeline& o);
    Pipeline(Pipeline&&) = default;
    Pipeline& operator=(Pipeline&&) = default;

    EvidenceStream& stream() { return *root_; }
    const EvidenceStream& stream() const { return *root_; }
    std::unique_ptr<EvidenceStream> instantiate() const { return root_->clone(); }

    std::string canonical() const { return root_->describe(); }
    bool dataFiltrationValid() const { return root_->dataFiltrationValid(); }
    bool isEProcess() const { return root_->isEProcess(); }

private:
    std::unique_ptr<EvidenceStream> root_;
};

// node := atom
//       | lift(adjuster, node[, max=floor|observed])
//       | combine(w*node, ...)
//       | calibrate(calibrator, node[, p=max|current])
//       | naive-mean(node, ...)          not an e-process
//       | spine(kappa, node)             not an e-process
Pipeline parse_pipeline(const std::string& expr);

std::vector<std::string> pipeline_grammar_help();

// Preset pipelines over binary data, valid or not in the data filtration.
std::vector<std::string> shipped_pipelines();

} // namespace savi
