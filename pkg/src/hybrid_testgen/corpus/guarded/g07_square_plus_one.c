int main() {
 int a = __VERIFIER_nondet_int();
 int b = __VERIFIER_nondet_int();
 if (b > 1000 && b < 2000 && a == b * b + 1) {
  int i = 0;
  int y = a;
  while (i < 12) {
   y = y + b;
   i = i + 1;
  }
  int z = __VERIFIER_nondet_int();
  if ((y + z) % 13 == 9) {
   reach_error();
  }
 }
 return 0;
}
