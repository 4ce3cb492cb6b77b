int main() {
 int a = __VERIFIER_nondet_int();
 int b = __VERIFIER_nondet_int();
 if (a == 31337 && b * 2 == a + 7) {
  int i = 0;
  int y = b;
  while (i < 10) {
   y = y + 5;
   i = i + 1;
  }
  int z = __VERIFIER_nondet_int();
  if ((y + z) % 13 == 4) {
   reach_error();
  }
 }
 return 0;
}
