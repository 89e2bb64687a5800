#include "savi/pipeline.hpp"

#include <algorithm>
#include <cctype>

#include "savi/adjust.hpp"
#include "savi/lift.hpp"
#include "savi/streams.hpp"
#include "savi/text.hpp"

namespace savi {

ParseError::ParseError(size_t pos, const std::string& msg)
    : ConfigError("column " + std::to_string(pos + 1) + ": " + msg), position(pos)
{
}

Pipeline::Pipeline(std::unique_ptr<EvidenceStream> root) : root_(std::move(root)) {}

Pipeline::Pipeline(const Pipeline& o) : root_(o.root_->clone()) {}

Pipeline& Pipeline::operator=(const Pipeline& o)
{
    if (this != &o)
        root_ = o.root_->clone();
    return *this;
}

namespace {

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    std::unique_ptr<EvidenceStream> parseAll()
    {
        auto n = node();
        ws();
        if (pos_ != s_.size())
            throw ParseError(pos_, "unexpected trailing input '" + s_.substr(pos_) + "'");
        return n;
    }

private:
    const std::string& s_;
    size_t pos_ = 0;

    void ws()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    bool lookingAt(const std::string& kw)
    {
        ws();
        if (s_.compare(pos_, kw.size(), kw) != 0)
            return false;
        size_t p = pos_ + kw.size();
        while (p < s_.size() && std::isspace(static_cast<unsigned char>(s_[p])))
            ++p;
        return p < s_.size() && s_[p] == '(';
    }

    void expect(char c)
    {
        ws();
        if (pos_ >= s_.size() || s_[pos_] != c)
            throw ParseError(pos_, std::string("expected '") + c + "'");
        ++pos_;
    }

    bool accept(char c)
    {
        ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void enter(const std::string& kw)
    {
        ws();
        pos_ += kw.size();
        expect('(');
    }

    // Segment up to the next ',' or ')' at this level.
    std::string segment(size_t from, size_t& end) const
    {
        size_t p = from;
        while (p < s_.size() && s_[p] != ',' && s_[p] != ')' && s_[p] != '(')
            ++p;
        end = p;
        return std::string(trim(std::string_view(s_).substr(from, p - from)));
    }

    // A spec string whose own parameters may contain commas. Following
    // comma-separated items are absorbed while their key is one of `keys`.
    std::string spec(const std::vector<std::string>& keys, size_t& start)
    {
        ws();
        start = pos_;
        size_t end;
        std::string out = segment(pos_, end);
        if (out.empty())
            throw ParseError(pos_, "expected a spec");
        pos_ = end;
        while (pos_ < s_.size() && s_[pos_] == ',') {
            size_t e2;
            std::string seg = segment(pos_ + 1, e2);
            std::string key = seg.substr(0, seg.find('='));
            if (seg.find('*') != std::string::npos || std::find(keys.begin(), keys.end(), key) == keys.end())
                break;
            out += "," + seg;
            pos_ = e2;
        }
        return out;
    }

    std::unique_ptr<EvidenceStream> node()
    {
        ws();
        size_t at = pos_;
        if (lookingAt("lift"))
            return lift();
        if (lookingAt("combine"))
            return combineNode();
        if (lookingAt("naive-mean"))
            return naiveMean();
        if (lookingAt("spine"))
            return spine();
        if (lookingAt("calibrate"))
            return calibrate();
        size_t start;
        std::string name;
        {
            size_t end;
            std::string head = segment(pos_, end);
            name = head.substr(0, head.find(':'));
        }
        if (!is_stream_name(name))
            throw ParseError(at, "unknown stream or node '" + name + "'");
        std::string sp = spec(stream_param_keys(name), start);
        try {
            return make_stream(sp);
        } catch (const std::exception& e) {
            throw ParseError(start, e.what());
        }
    }

    std::unique_ptr<EvidenceStream> lift()
    {
        enter("lift");
        size_t start;
        std::string as = spec({"scale", "kappa"}, start);
        AdjusterSpec a;
        try {
            a = parse_adjuster(as);
        } catch (const std::exception& e) {
            throw ParseError(start, e.what());
        }
        if (a.kind == AdjusterKind::Spine)
            throw ParseError(start, "spine adjusters are not valid lifters: the spine family is two-argument "
                                    "and its stopped means exceed 1 (negative result); use spine(k, node) only "
                                    "as a negative control");
        expect(',');
        size_t innerAt = pos_;
        auto inner = node();
        if (!inner->isEProcess())
            throw ParseError(innerAt, "lift needs an e-process; '" + inner->describe() + "' is not one");
        MaxMode mode = MaxMode::Floor;
        if (accept(',')) {
            size_t optAt = pos_;
            size_t end;
            std::string opt = segment(pos_, end);
            pos_ = end;
            if (opt == "max=observed")
                mode = MaxMode::Observed;
            else if (opt != "max=floor")
                throw ParseError(optAt, "unknown lift option '" + opt + "'");
        }
        expect(')');
        return e_lift(std::move(inner), a, mode);
    }

    std::unique_ptr<EvidenceStream> combineNode()
    {
        size_t at = pos_;
        enter("combine");
        std::vector<Component> parts;
        do {
            ws();
            size_t wAt = pos_;
            size_t p = pos_;
            while (p < s_.size() && s_[p] != '*' && s_[p] != ',' && s_[p] != ')')
                ++p;
            if (p >= s_.size() || s_[p] != '*')
                throw ParseError(wAt, "combine items look like w*node");
            double w;
            try {
                w = parse_double(s_.substr(pos_, p - pos_), "weight");
            } catch (const std::exception& e) {
                throw ParseError(wAt, e.what());
            }
            pos_ = p + 1;
            size_t nAt = pos_;
            auto n = node();
            if (!n->dataFiltrationValid())
                throw ParseError(nAt, "'" + n->describe() + "' is only valid in a coarser filtration; "
                                      "wrap it in lift(adjuster, ...) before combining");
            parts.emplace_back(w, std::move(n));
        } while (accept(','));
        expect(')');
        try {
            return combine(std::move(parts));
        } catch (const std::exception& e) {
            throw ParseError(at, e.what());
        }
    }

    std::unique_ptr<EvidenceStream> naiveMean()
    {
        enter("naive-mean");
        std::vector<std::unique_ptr<EvidenceStream>> parts;
        do
            parts.push_back(node());
        while (accept(','));
        expect(')');
        return std::make_unique<NaiveMeanStream>(std::move(parts));
    }

    std::unique_ptr<EvidenceStream> spine()
    {
        enter("spine");
        ws();
        size_t at = pos_;
        size_t end;
        std::string k = segment(pos_, end);
        pos_ = end;
        double kappa;
        try {
            kappa = parse_double(k, "spine kappa");
            expect(',');
            auto inner = node();
            expect(')');
            return std::make_unique<SpineStream>(kappa, std::move(inner));
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(at, e.what());
        }
    }

    std::unique_ptr<EvidenceStream> calibrate()
    {
        enter("calibrate");
        size_t start;
        std::string cs = spec({}, start);
        CalibratorSpec c;
        try {
            c = parse_calibrator(cs);
        } catch (const std::exception& e) {
            throw ParseError(start, e.what());
        }
        expect(',');
        auto inner = node();
        PMode mode = PMode::ReciprocalMax;
        if (accept(',')) {
            size_t optAt = pos_;
            size_t end;
            std::string opt = segment(pos_, end);
            pos_ = end;
            if (opt == "p=current")
                mode = PMode::Reciprocal;
            else if (opt != "p=max")
                throw ParseError(optAt, "unknown calibrate option '" + opt + "'");
        }
        expect(')');
        return calibrate_p_to_e(std::move(inner), c, mode);
    }
};

} // namespace

Pipeline parse_pipeline(const std::string& expr)
{
    Parser p(expr);
    return Pipeline(p.parseAll());
}

std::vector<std::string> pipeline_grammar_help()
{
    return {
        "node := stream",
        "      | lift(adjuster, node[, max=floor|observed])",
        "      | combine(w1*node, w2*node, ...)      weights sum to 1",
        "      | calibrate(calibrator, node[, p=max|current])",
        "      | naive-mean(node, ...)               comparator, not an e-process",
        "      | spine(kappa, node)                  negative control, not an e-process",
        "adjuster := mix | kv | sqrt | power:K | zero:K      (spine:K is rejected by lift)",
        "calibrator := mix | power:K",
    };
}

} // namespace savi

namespace savi {

std::vector<std::string> shipped_pipelines()
{
    return {
        "ui-exch",
        "conf:lambda=1",
        "conf:jumper,eps=0.01",
        "lift(mix, conf:lambda=1)",
        "lift(mix, conf:lambda=1, max=observed)",
        "lift(kv, conf:jumper,eps=0.01)",
        "lift(sqrt, conf:jumper,eps=0.01)",
        "lift(power:0.5, conf:lambda=-1)",
        "lift(zero:1, conf:jumper,eps=0.01)",
        "combine(0.5*ui-exch, 0.5*lift(mix, conf:jumper,eps=0.01))",
        "combine(0.5*ui-exch, 0.5*lift(zero:1, conf:jumper,eps=0.01))",
        "calibrate(mix, conf:lambda=1)",
        "calibrate(power:0.5, conf:jumper,eps=0.01, p=current)",
        "naive-mean(ui-exch, conf:jumper,eps=0.01)",
        "spine(0.5, conf:lambda=1)",
    };
}

} // namespace savi
