bool parity(int v) {
 return v % 2 == 0;
}

int main() {
 bool a = __VERIFIER_nondet_bool();
 bool b = __VERIFIER_nondet_bool();
 int x = __VERIFIER_nondet_int();
 if (a && !b) {
  if (parity(x)) {
   x = x / 2;
  } else {
   x = 3 * x + 1;
  }
 } else {
  if (a || b) {
   x = -x;
  }
 }
 if (x == 7) {
  reach_error();
 }
 return 0;
}
