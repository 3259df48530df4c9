#include "nlslab/commands.hpp"

int main(int argc, char** argv) { return nlslab::run_cli(argc, argv); }
