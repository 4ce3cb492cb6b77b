int main() {
 int x = __VERIFIER_nondet_int();
 if (x * x * x == 1879080904) {
  int i = 0;
  int y = x;
  while (i < 16) {
   y = y + 2;
   i = i + 1;
  }
  int z = __VERIFIER_nondet_int();
  if ((y + z) % 13 == 3) {
   reach_error();
  }
 }
 return 0;
}
