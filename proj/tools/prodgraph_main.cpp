#include "prodgraph/cli.hpp"

int main(int argc, char** argv) { return prodgraph::run_cli(argc, argv); }
