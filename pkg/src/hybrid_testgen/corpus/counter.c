int main() {
 int budget = __VERIFIER_nondet_int();
 int steps = 0;
 if (budget > 10) {
  budget = 10;
 }
 while (budget > 0) {
  int cmd = __VERIFIER_nondet_int();
  if (cmd == 1) {
   steps = steps + 1;
  } else {
   if (cmd == 2) {
    steps = steps - 1;
   }
  }
  budget = budget - 1;
  if (steps >= 3) {
   reach_error();
  }
 }
 return steps;
}
