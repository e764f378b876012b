#include "dative/cli.hpp"

int main(int argc, char** argv) { return dative::cli::dispatch(argc, argv); }
