int main() {
 int a = __VERIFIER_nondet_int();
 int b = __VERIFIER_nondet_int();
 if (3 * a - 7 * b == 1230 && a + b == 1000) {
  int i = 0;
  int y = b;
  while (i < 9) {
   y = y + a;
   i = i + 1;
  }
  int z = __VERIFIER_nondet_int();
  if ((y + z) % 13 == 11) {
   reach_error();
  }
 }
 return 0;
}
