#include <assert.h>

// DEFINE-TIMER TIMER1;
unsigned int TIMER1;
// DEFINE-TIMER TIMER2;
unsigned int TIMER2;
const int d1 = 3;
const int d2 = 4;
const int d3 = 2;
const int d4 = 6;
const int d5 = 5;
const int alpha = 7;
const int beta = 8;
const int gamma = 20;
int sensor;
int level;
// WCET-function [d1]
void f1(void) {
  TIMER1 += d1;
  TIMER2 += d1;
  sensor = 1;
}

// WCET-function [d2]
void f2(void) {
  TIMER1 += d2;
  TIMER2 += d2;
  level = sensor + 1;
}

// WCET-function [d3]
void f3(void) {
  TIMER1 += d3;
  TIMER2 += d3;
  sensor = 0;
}

// WCET-function [d4]
void f4(void) {
  TIMER1 += d4;
  TIMER2 += d4;
  level = level * 2;
}

// WCET-function [d5]
void f5(void) {
  TIMER1 += d5;
  TIMER2 += d5;
  level = 0;
}

int main(int argc, char *argv[]) {
  // RESET-TIMER TIMER1=0;
  TIMER1 = 0;
  // RESET-TIMER TIMER2=0;
  TIMER2 = 0;
  f1();
  f2();
  // ASSERT-TIMER (TIMER1 <= alpha);
  assert (TIMER1 <= alpha);
  // RESET-TIMER TIMER1=0;
  TIMER1 = 0;
  f3();
  f4();
  // ASSERT-TIMER (TIMER1 <= beta);
  assert (TIMER1 <= beta);
  f5();
  // ASSERT-TIMER (TIMER2 <= gamma);
  assert (TIMER2 <= gamma);
  return 0;
}
