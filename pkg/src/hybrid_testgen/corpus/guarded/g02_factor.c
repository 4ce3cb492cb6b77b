int main() {
 int a = __VERIFIER_nondet_int();
 int b = __VERIFIER_nondet_int();
 if (a > 1 && b > 1 && a * b == 4087) {
  int i = 0;
  int y = a;
  while (i < 10) {
   y = y + 1;
   i = i + 1;
  }
  int z = __VERIFIER_nondet_int();
  if ((y + z) % 13 == 7) {
   reach_error();
  }
 }
 return 0;
}
