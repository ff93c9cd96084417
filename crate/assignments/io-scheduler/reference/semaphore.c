#include <errno.h>
#include <stdio.h>
#include <stdlib.h>
#include <sys/ipc.h>
#include <sys/sem.h>

#include "semaphore.h"

static void sem_change(int sem_id, int num_sem, int delta) {
    struct sembuf op;

    op.sem_num = num_sem;
    op.sem_op = delta;
    op.sem_flg = 0;

    while (semop(sem_id, &op, 1) < 0) {
        if (errno != EINTR) {
            perror("semop");
            exit(1);
        }
    }
}

void Wait_Sem(int sem_id, int num_sem) {
    sem_change(sem_id, num_sem, -1);
}

void Signal_Sem(int sem_id, int num_sem) {
    sem_change(sem_id, num_sem, 1);
}
