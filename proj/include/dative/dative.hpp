#pragma once

#include "dative/cli.hpp"
#include "dative/conllu.hpp"
#include "dative/corpus.hpp"
#include "dative/dative_extract.hpp"
#include "dative/experiments.hpp"
#include "dative/model.hpp"
#include "dative/novel_verb.hpp"
#include "dative/scoring.hpp"
#include "dative/stimuli.hpp"
#include "dative/tokenizer.hpp"
#include "dative/toy_data.hpp"
#include "dative/train.hpp"
#include "dative/util.hpp"
#include "dative/verbhood.hpp"
