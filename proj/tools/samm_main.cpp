#include "samm/cli.hpp"

int main(int argc, char** argv)
{
  return samm::cli::run(argc, argv);
}
